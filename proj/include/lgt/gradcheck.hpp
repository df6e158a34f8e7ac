#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lgt/energy.hpp"

namespace lgt {

/// Central-difference validation of the analytic energy gradients.
///
/// Relative error per component is |a - f| / max(|a|, |f|); components whose
/// magnitude (max of analytic and numeric) is at or below `floor` are skipped.
struct GradCheckOptions {
    double step = 1e-5;
    double floor = 1e-10;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t compared = 0;
    std::size_t skipped = 0;

    void merge(const GradCheckResult& other);
};

GradCheckResult check_coefficient_gradients(const TransformChain& chain, const Coefficients& coeffs,
                                            const PatchPair& pair, const EnergyConfig& config,
                                            GradCheckOptions options = {});

/// Perturbs Re/Im of every entry of U and lambda of every operator
/// (2(n^2 + n) real parameters each), rebuilding U^-1 at each probe.
GradCheckResult check_operator_gradients(const TransformChain& chain,
                                         const std::vector<Coefficients>& coeffs,
                                         const std::vector<PatchPair>& pairs,
                                         const EnergyConfig& config, GradCheckOptions options = {});

/// A random, well-conditioned problem for gradient checking.
struct GradCheckInstance {
    TransformChain chain;
    std::vector<Coefficients> coeffs;
    std::vector<PatchPair> pairs;
    EnergyConfig config;
};

GradCheckInstance random_gradcheck_instance(std::mt19937_64& rng, Index n, std::size_t k_ops,
                                            std::size_t samples = 2);

struct GradCheckSuiteResult {
    std::size_t instances = 0;
    GradCheckResult coefficients;
    GradCheckResult operators;
    double max_rel_error() const;
};

/// Runs `instances` random problems cycling n in {4, 6, 8} and K in {1, 2, 3}.
GradCheckSuiteResult run_gradcheck_suite(std::size_t instances, std::uint64_t seed,
                                         GradCheckOptions options = {});

}  // namespace lgt
