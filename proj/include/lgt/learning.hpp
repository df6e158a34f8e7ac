#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lgt/energy.hpp"
#include "lgt/inference.hpp"
#include "lgt/optimize.hpp"

namespace lgt {

/// splitmix64 finalizer: decorrelated sub-seed `stream` of `seed`.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct TrainSpec {
    std::size_t n_ops = 1;
    std::vector<std::size_t> fixed_ops;  // held constant bit-for-bit
    std::size_t batch_size = 200;
    int epochs = 50;
    std::uint64_t seed = 0;
    double init_scale = 0.01;
    MinimizeSpec m_step = MinimizeSpec::m_step();
    InferencePolicy inference{};

    bool is_fixed(std::size_t k) const;
    void validate() const;
};

/// Near-identity random operator: U = I + eps G, lambda = eps g with complex
/// standard Gaussian G, g.
LieOperator random_operator(Index n, double scale, std::mt19937_64& rng);

/// Chain of spec.n_ops operators. Entries of `preset` (same length as
/// n_ops, or empty) that hold a value are used as-is; the rest are drawn
/// with random_operator from spec.seed.
TransformChain initial_chain(Index n, const TrainSpec& spec,
                             const std::vector<std::optional<LieOperator>>& preset = {});

struct MStepResult {
    TransformChain chain;
    double energy_before = 0.0;
    double energy_after = 0.0;
    double grad_norm = 0.0;           // operator-gradient 2-norm at the start
    std::vector<std::size_t> reverted;  // operators restored after a failed rebuild
    MinimizeResult minimize;
};

/// Minimizes the batch energy over (U, Lambda) of the free operators with
/// the coefficients held fixed. Parameters are packed as interleaved
/// (real, imaginary) pairs, U column-major followed by lambda, operator by
/// operator.
MStepResult m_step(const TransformChain& chain, const std::vector<Coefficients>& coeffs,
                   const std::vector<PatchPair>& pairs, const EnergyConfig& config,
                   const TrainSpec& spec);

/// Rescales the columns of U by the real diagonal R with
/// R_jj = (sum_i |W_ji|^2 / sum_i |U_ij|^2)^(1/4), W = U^-1, which balances
/// column power of U against row power of U^-1 and leaves A unchanged.
/// Throws DegenerateColumn when a column or row carries no power.
LieOperator rescale_degeneracy(const LieOperator& op);

/// Sum_ij |U_ij|^2 + |W_ij|^2.
double joint_power(const ComplexMatrix& u, const ComplexMatrix& w);

struct EpochLog {
    int epoch = 0;
    double e_pre = 0.0;   // after the E-step, before the M-step
    double e_post = 0.0;  // after the M-step and rescaling, same batch
    double mean_psnr = 0.0;  // E-step reconstructions, over the config mask
    double grad_norm = 0.0;
    std::size_t pairs_used = 0;
    std::size_t pairs_skipped = 0;
    std::vector<std::size_t> reverted;

    static std::string csv_header();
    std::string csv_line() const;
};

/// Supplies the pairs for one epoch. Must be a pure function of its
/// arguments for training (and resume) to be reproducible.
using BatchProvider = std::function<std::vector<PatchPair>(int epoch, std::size_t count)>;
/// Called after every epoch with the updated chain.
using EpochCallback = std::function<void(const EpochLog&, const TransformChain&)>;

struct TrainResult {
    TransformChain chain;
    std::vector<EpochLog> log;
};

/// EM loop: for each epoch in [first_epoch, spec.epochs) draw a fresh batch,
/// infer coefficients for every pair, run one M-step and rescale every free
/// operator. Inference randomness is seeded per epoch, so resuming from the
/// chain saved after epoch e with first_epoch = e + 1 reproduces an
/// uninterrupted run.
TrainResult train(const BatchProvider& batches, const EnergyConfig& config, const TrainSpec& spec,
                  TransformChain chain, int first_epoch = 0, const EpochCallback& on_epoch = {});

}  // namespace lgt
