#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgt/energy.hpp"
#include "lgt/optimize.hpp"

namespace lgt {

enum class BlurMode {
    Adaptive,    // sigma is a free variable, started coarse
    FrozenZero,  // sigma pinned at 0 (no transformation-space smoothing)
};

struct InferencePolicy {
    /// Per-operator starting mu; empty means all zero.
    std::vector<double> init_mu;
    /// Per-operator starting sigma; empty means default_initial_sigma.
    std::vector<double> init_sigma;
    /// Extra starts beyond the first, with mu drawn uniformly from
    /// +-restart_half_width[k] (default: pi / spectral radius).
    std::size_t restarts = 0;
    std::vector<double> restart_half_width;
    BlurMode blur_mode = BlurMode::Adaptive;
    std::uint64_t seed = 0;
    MinimizeSpec minimize = MinimizeSpec::inference();

    void validate(std::size_t k_ops) const;
};

/// Sigma for which the fastest eigenmode is attenuated by e^-4, i.e.
/// max_i |lambda_i|^2 sigma^2 / 2 = 4. Returns 1 for a zero spectrum.
double default_initial_sigma(const LieOperator& op);

struct InferenceResult {
    Coefficients coeffs;
    double energy = 0.0;
    bool converged = false;
    int iterations = 0;
    std::size_t failed_starts = 0;
};

/// Minimizes the full energy of one pair over (mu, sigma) with operators
/// held fixed. Sigma is optimized as log(sigma). The best of all starts is
/// returned. Throws AllRestartsFailed if no start produced a finite energy.
InferenceResult infer(const TransformChain& chain, const PatchPair& pair,
                      const EnergyConfig& config, const InferencePolicy& policy);

struct BatchInference {
    std::vector<std::optional<InferenceResult>> results;  // nullopt = skipped pair
    std::vector<std::string> errors;                      // one per skipped pair
};

/// Runs infer over every pair in parallel; results are in pair order.
BatchInference infer_batch(const TransformChain& chain, const std::vector<PatchPair>& pairs,
                           const EnergyConfig& config, const InferencePolicy& policy);

struct RecoveryTolerance {
    double relative = 0.01;
    double absolute_floor = 0.01;
};

struct RecoveryStats {
    std::vector<double> per_operator;  // fraction of samples recovered, per operator
    double aggregate = 0.0;            // fraction over all coefficients
    std::size_t samples = 0;
};

/// A coefficient counts as recovered when |inferred - truth| <=
/// max(relative * |truth|, absolute_floor). Operators flagged in `periodic`
/// are compared modulo 2 pi.
RecoveryStats coefficient_recovery_stats(const std::vector<Coefficients>& truth,
                                         const std::vector<Coefficients>& inferred,
                                         const std::vector<bool>& periodic = {},
                                         RecoveryTolerance tol = {});

}  // namespace lgt
