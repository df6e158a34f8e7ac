#include "lgt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lgt/parallel.hpp"

namespace lgt {

namespace {

constexpr double kMinInitialSigma = 1e-8;

struct Start {
    RealVector mu;
    RealVector sigma;
};

InferenceResult run_start(const TransformChain& chain, const PatchPair& pair,
                          const EnergyConfig& config, const InferencePolicy& policy,
                          const Start& start) {
    const auto k = static_cast<Index>(chain.size());
    const bool adaptive = policy.blur_mode == BlurMode::Adaptive;

    auto unpack = [&](const RealVector& x) {
        Coefficients c = Coefficients::zeros(chain.size());
        c.mu = x.head(k);
        if (adaptive) c.sigma = x.tail(k).array().exp().matrix();
        return c;
    };

    Objective objective = [&](const RealVector& x, RealVector& grad) {
        const Coefficients c = unpack(x);
        const SampleEnergy e = sample_energy(chain, c, pair, config, true);
        grad.head(k) = e.grad.g_mu;
        // d/d rho with sigma = e^rho
        if (adaptive) grad.tail(k) = e.grad.g_sigma.cwiseProduct(c.sigma);
        return e.total;
    };

    RealVector x0(adaptive ? 2 * k : k);
    x0.head(k) = start.mu;
    if (adaptive) x0.tail(k) = start.sigma.cwiseMax(kMinInitialSigma).array().log().matrix();

    const MinimizeResult m = minimize(objective, x0, policy.minimize);
    InferenceResult out;
    out.coeffs = unpack(m.x);
    out.energy = m.f;
    out.converged = m.converged();
    out.iterations = m.iterations;
    return out;
}

}  // namespace

void InferencePolicy::validate(std::size_t k_ops) const {
    if (!init_mu.empty() && init_mu.size() != k_ops) {
        throw DimensionMismatch("init_mu must have one entry per operator");
    }
    if (!init_sigma.empty() && init_sigma.size() != k_ops) {
        throw DimensionMismatch("init_sigma must have one entry per operator");
    }
    for (double s : init_sigma) {
        if (!(s >= 0.0)) throw Error("init_sigma must be non-negative");
    }
    if (!restart_half_width.empty() && restart_half_width.size() != k_ops) {
        throw DimensionMismatch("restart_half_width must have one entry per operator");
    }
    minimize.validate();
}

double default_initial_sigma(const LieOperator& op) {
    const double radius = op.spectral_radius();
    return radius > 0.0 ? std::sqrt(8.0) / radius : 1.0;
}

InferenceResult infer(const TransformChain& chain, const PatchPair& pair,
                      const EnergyConfig& config, const InferencePolicy& policy) {
    const std::size_t k_ops = chain.size();
    policy.validate(k_ops);
    config.validate(chain.dim());
    const auto k = static_cast<Index>(k_ops);

    Start first{RealVector::Zero(k), RealVector::Zero(k)};
    for (Index j = 0; j < k; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (!policy.init_mu.empty()) first.mu[j] = policy.init_mu[ju];
        first.sigma[j] = policy.init_sigma.empty() ? default_initial_sigma(chain[ju])
                                                   : policy.init_sigma[ju];
    }

    std::vector<Start> starts{first};
    if (policy.restarts > 0) {
        std::mt19937_64 rng(policy.seed ^ (0x9e3779b97f4a7c15ULL * (pair.id + 1)));
        for (std::size_t r = 0; r < policy.restarts; ++r) {
            Start s = first;
            for (Index j = 0; j < k; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                double half = policy.restart_half_width.empty()
                                  ? std::numbers::pi / std::max(chain[ju].spectral_radius(), 1e-12)
                                  : policy.restart_half_width[ju];
                std::uniform_real_distribution<double> dist(-half, half);
                s.mu[j] = dist(rng);
            }
            starts.push_back(std::move(s));
        }
    }

    std::optional<InferenceResult> best;
    std::size_t failed = 0;
    std::string last_error;
    for (const Start& s : starts) {
        try {
            InferenceResult r = run_start(chain, pair, config, policy, s);
            if (!best || r.energy < best->energy) best = std::move(r);
        } catch (const Error& e) {
            ++failed;
            last_error = e.what();
        }
    }
    if (!best) {
        throw AllRestartsFailed("every inference start failed for pair " + std::to_string(pair.id) +
                                ": " + last_error);
    }
    best->failed_starts = failed;
    return *best;
}

BatchInference infer_batch(const TransformChain& chain, const std::vector<PatchPair>& pairs,
                           const EnergyConfig& config, const InferencePolicy& policy) {
    BatchInference out;
    out.results.resize(pairs.size());
    std::vector<std::string> errors(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t t) {
        try {
            out.results[t] = infer(chain, pairs[t], config, policy);
        } catch (const AllRestartsFailed& e) {
            errors[t] = e.what();
        }
    });
    for (auto& e : errors) {
        if (!e.empty()) out.errors.push_back(std::move(e));
    }
    return out;
}

RecoveryStats coefficient_recovery_stats(const std::vector<Coefficients>& truth,
                                         const std::vector<Coefficients>& inferred,
                                         const std::vector<bool>& periodic,
                                         RecoveryTolerance tol) {
    if (truth.size() != inferred.size()) {
        throw DimensionMismatch("truth and inferred batches differ in size");
    }
    RecoveryStats stats;
    stats.samples = truth.size();
    if (truth.empty()) return stats;

    const std::size_t k_ops = truth.front().size();
    if (!periodic.empty() && periodic.size() != k_ops) {
        throw DimensionMismatch("periodic flags must have one entry per operator");
    }
    std::vector<std::size_t> hits(k_ops, 0);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (truth[t].size() != k_ops || inferred[t].size() != k_ops) {
            throw DimensionMismatch("coefficient sets differ in operator count");
        }
        for (std::size_t k = 0; k < k_ops; ++k) {
            const double want = truth[t].mu[static_cast<Index>(k)];
            const double got = inferred[t].mu[static_cast<Index>(k)];
            double diff = std::abs(got - want);
            if (!periodic.empty() && periodic[k]) {
                diff = std::remainder(got - want, 2.0 * std::numbers::pi);
                diff = std::abs(diff);
            }
            if (diff <= std::max(tol.relative * std::abs(want), tol.absolute_floor)) ++hits[k];
        }
    }
    std::size_t total = 0;
    for (std::size_t k = 0; k < k_ops; ++k) {
        stats.per_operator.push_back(static_cast<double>(hits[k]) /
                                     static_cast<double>(truth.size()));
        total += hits[k];
    }
    stats.aggregate = static_cast<double>(total) / static_cast<double>(truth.size() * k_ops);
    return stats;
}

}  // namespace lgt
