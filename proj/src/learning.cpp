#include "lgt/learning.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "lgt/metrics.hpp"

namespace lgt {

namespace {

Index packed_size(Index n) { return 2 * (n * n + n); }

void pack_operator(const ComplexMatrix& u, const ComplexVector& lambda, RealVector& x, Index at) {
    const Index n = lambda.size();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            x[at++] = u(i, j).real();
            x[at++] = u(i, j).imag();
        }
    }
    for (Index i = 0; i < n; ++i) {
        x[at++] = lambda[i].real();
        x[at++] = lambda[i].imag();
    }
}

void unpack_operator(const RealVector& x, Index at, Index n, ComplexMatrix& u,
                     ComplexVector& lambda) {
    u.resize(n, n);
    lambda.resize(n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            u(i, j) = Complex(x[at], x[at + 1]);
            at += 2;
        }
    }
    for (Index i = 0; i < n; ++i) {
        lambda[i] = Complex(x[at], x[at + 1]);
        at += 2;
    }
}

std::vector<std::size_t> free_operators(const TrainSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < spec.n_ops; ++k) {
        if (!spec.is_fixed(k)) out.push_back(k);
    }
    return out;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool TrainSpec::is_fixed(std::size_t k) const {
    return std::find(fixed_ops.begin(), fixed_ops.end(), k) != fixed_ops.end();
}

void TrainSpec::validate() const {
    if (n_ops < 1) throw Error("n_ops must be >= 1");
    if (fixed_ops.size() > n_ops) throw Error("more fixed operators than operators");
    for (std::size_t k : fixed_ops) {
        if (k >= n_ops) throw Error("fixed operator index out of range");
    }
    if (batch_size < 1) throw Error("batch_size must be >= 1");
    if (epochs < 0) throw Error("epochs must be >= 0");
    if (!(init_scale > 0.0)) throw Error("init_scale must be positive");
    m_step.validate();
}

LieOperator random_operator(Index n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix u = ComplexMatrix::Identity(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) u(i, j) += scale * Complex(normal(rng), normal(rng));
    }
    ComplexVector lambda(n);
    for (Index i = 0; i < n; ++i) lambda[i] = scale * Complex(normal(rng), normal(rng));
    return LieOperator::from_eigen(std::move(u), std::move(lambda));
}

TransformChain initial_chain(Index n, const TrainSpec& spec,
                             const std::vector<std::optional<LieOperator>>& preset) {
    spec.validate();
    if (!preset.empty() && preset.size() != spec.n_ops) {
        throw DimensionMismatch("preset must have one slot per operator");
    }
    std::mt19937_64 rng(spec.seed);
    std::vector<LieOperator> ops;
    for (std::size_t k = 0; k < spec.n_ops; ++k) {
        if (!preset.empty() && preset[k]) {
            if (preset[k]->size() != n) throw DimensionMismatch("preset operator has wrong size");
            ops.push_back(*preset[k]);
        } else {
            ops.push_back(random_operator(n, spec.init_scale, rng));
        }
    }
    return TransformChain(std::move(ops));
}

MStepResult m_step(const TransformChain& chain, const std::vector<Coefficients>& coeffs,
                   const std::vector<PatchPair>& pairs, const EnergyConfig& config,
                   const TrainSpec& spec) {
    if (chain.size() != spec.n_ops) throw DimensionMismatch("chain size differs from n_ops");
    const Index n = chain.dim();
    const std::vector<std::size_t> free = free_operators(spec);
    const Index block = packed_size(n);

    MStepResult out;
    const EnergyReport start = energy_total(chain, coeffs, pairs, config, {false, !free.empty()});
    out.energy_before = start.total;
    out.energy_after = start.total;
    out.chain = chain;
    if (free.empty()) return out;
    {
        double sq = 0.0;
        for (std::size_t k : free) {
            sq += start.g_ops[k].u.squaredNorm() + start.g_ops[k].lambda.squaredNorm();
        }
        out.grad_norm = std::sqrt(sq);
    }

    RealVector x0(block * static_cast<Index>(free.size()));
    for (std::size_t f = 0; f < free.size(); ++f) {
        const LieOperator& op = chain[free[f]];
        pack_operator(op.u(), op.lambda(), x0, block * static_cast<Index>(f));
    }

    auto build = [&](const RealVector& x) {
        std::vector<LieOperator> ops = chain.ops();
        ComplexMatrix u;
        ComplexVector lambda;
        for (std::size_t f = 0; f < free.size(); ++f) {
            unpack_operator(x, block * static_cast<Index>(f), n, u, lambda);
            ops[free[f]] = LieOperator::from_eigen(u, lambda, chain[free[f]].real_valued());
        }
        return TransformChain(std::move(ops));
    };

    Objective objective = [&](const RealVector& x, RealVector& grad) {
        const TransformChain trial = build(x);
        const EnergyReport r = energy_total(trial, coeffs, pairs, config, {false, true});
        for (std::size_t f = 0; f < free.size(); ++f) {
            const OperatorGradient& g = r.g_ops[free[f]];
            pack_operator(g.u, g.lambda, grad, block * static_cast<Index>(f));
        }
        return r.total;
    };

    out.minimize = minimize(objective, x0, spec.m_step);

    // Rebuild operator by operator so a single failure only reverts itself.
    std::vector<LieOperator> ops = chain.ops();
    ComplexMatrix u;
    ComplexVector lambda;
    for (std::size_t f = 0; f < free.size(); ++f) {
        unpack_operator(out.minimize.x, block * static_cast<Index>(f), n, u, lambda);
        try {
            ops[free[f]] = LieOperator::from_eigen(u, lambda, chain[free[f]].real_valued());
        } catch (const NonDiagonalizable&) {
            out.reverted.push_back(free[f]);
        }
    }
    out.chain = TransformChain(std::move(ops));
    out.energy_after = out.reverted.empty()
                           ? out.minimize.f
                           : energy_total(out.chain, coeffs, pairs, config, {false, false}).total;
    if (out.energy_after > out.energy_before) {
        // A partial revert can lose the decrease; keep the previous chain.
        for (std::size_t k : free) {
            if (std::find(out.reverted.begin(), out.reverted.end(), k) == out.reverted.end()) {
                out.reverted.push_back(k);
            }
        }
        out.chain = chain;
        out.energy_after = out.energy_before;
    }
    return out;
}

double joint_power(const ComplexMatrix& u, const ComplexMatrix& w) {
    return u.squaredNorm() + w.squaredNorm();
}

LieOperator rescale_degeneracy(const LieOperator& op) {
    const ComplexMatrix& u = op.u();
    const ComplexMatrix& w = op.u_inv();
    const Index n = op.size();
    RealVector r(n);
    for (Index j = 0; j < n; ++j) {
        const double col = u.col(j).squaredNorm();
        const double row = w.row(j).squaredNorm();
        if (!(col > 0.0) || !(row > 0.0) || !std::isfinite(col) || !std::isfinite(row)) {
            throw DegenerateColumn("eigenvector column " + std::to_string(j) + " carries no power");
        }
        r[j] = std::pow(row / col, 0.25);
    }
    ComplexMatrix scaled = u * r.cast<Complex>().asDiagonal();
    return LieOperator::from_eigen(std::move(scaled), op.lambda(), op.real_valued());
}

std::string EpochLog::csv_header() {
    return "epoch,E_pre,E_post,mean_psnr,grad_norm,pairs_used,pairs_skipped,reverted";
}

std::string EpochLog::csv_line() const {
    std::ostringstream s;
    s << std::setprecision(17) << epoch << ',' << e_pre << ',' << e_post << ',' << mean_psnr << ','
      << grad_norm << ',' << pairs_used << ',' << pairs_skipped << ',';
    for (std::size_t i = 0; i < reverted.size(); ++i) s << (i ? ";" : "") << reverted[i];
    return s.str();
}

TrainResult train(const BatchProvider& batches, const EnergyConfig& config, const TrainSpec& spec,
                  TransformChain chain, int first_epoch, const EpochCallback& on_epoch) {
    spec.validate();
    if (chain.size() != spec.n_ops) throw DimensionMismatch("chain size differs from n_ops");
    config.validate(chain.dim());
    const std::vector<std::size_t> free = free_operators(spec);

    TrainResult result;
    for (int epoch = std::max(first_epoch, 0); epoch < spec.epochs; ++epoch) {
        const std::vector<PatchPair> batch = batches(epoch, spec.batch_size);
        InferencePolicy policy = spec.inference;
        policy.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(epoch));
        const BatchInference inferred = infer_batch(chain, batch, config, policy);

        EpochLog log;
        log.epoch = epoch;
        std::vector<PatchPair> used;
        std::vector<Coefficients> coeffs;
        double psnr_sum = 0.0;
        for (std::size_t t = 0; t < batch.size(); ++t) {
            if (!inferred.results[t]) continue;
            const Coefficients& c = inferred.results[t]->coeffs;
            psnr_sum += psnr(apply_chain(chain, c, batch[t].src).y, batch[t].tgt, config.mask);
            used.push_back(batch[t]);
            coeffs.push_back(c);
        }
        log.pairs_used = used.size();
        log.pairs_skipped = batch.size() - used.size();
        if (used.empty()) {
            // Nothing to learn from; the chain carries over unchanged.
            if (on_epoch) on_epoch(log, chain);
            result.log.push_back(std::move(log));
            continue;
        }
        log.mean_psnr = psnr_sum / static_cast<double>(used.size());

        MStepResult m = m_step(chain, coeffs, used, config, spec);
        log.e_pre = m.energy_before;
        log.grad_norm = m.grad_norm;
        log.reverted = m.reverted;

        std::vector<LieOperator> ops = m.chain.ops();
        for (std::size_t k : free) {
            try {
                ops[k] = rescale_degeneracy(ops[k]);
            } catch (const Error&) {
                ops[k] = chain[k];
                log.reverted.push_back(k);
            }
        }
        chain = TransformChain(std::move(ops));
        log.e_post = energy_total(chain, coeffs, used, config, {false, false}).total;

        if (on_epoch) on_epoch(log, chain);
        result.log.push_back(std::move(log));
    }
    result.chain = std::move(chain);
    return result;
}

}  // namespace lgt
