#include "lgt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace lgt {

namespace {

void compare(double analytic, double numeric, const GradCheckOptions& opt, GradCheckResult& out) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale <= opt.floor) {
        ++out.skipped;
        return;
    }
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / scale);
    ++out.compared;
}

double central_difference(const std::function<double(double)>& f, double x0, double h) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

Complex random_complex(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return scale * Complex(re, im);
}

}  // namespace

void GradCheckResult::merge(const GradCheckResult& other) {
    max_rel_error = std::max(max_rel_error, other.max_rel_error);
    compared += other.compared;
    skipped += other.skipped;
}

GradCheckResult check_coefficient_gradients(const TransformChain& chain, const Coefficients& coeffs,
                                            const PatchPair& pair, const EnergyConfig& config,
                                            GradCheckOptions options) {
    const CoefficientGradient g = grad_mu_sigma(chain, coeffs, pair, config);
    GradCheckResult out;
    for (Index k = 0; k < coeffs.mu.size(); ++k) {
        auto energy_at_mu = [&](double v) {
            Coefficients c = coeffs;
            c.mu[k] = v;
            return sample_energy(chain, c, pair, config, false).total;
        };
        compare(g.g_mu[k], central_difference(energy_at_mu, coeffs.mu[k], options.step), options,
                out);
        auto energy_at_sigma = [&](double v) {
            Coefficients c = coeffs;
            c.sigma[k] = v;
            return sample_energy(chain, c, pair, config, false).total;
        };
        compare(g.g_sigma[k],
                central_difference(energy_at_sigma, coeffs.sigma[k], options.step), options, out);
    }
    return out;
}

GradCheckResult check_operator_gradients(const TransformChain& chain,
                                         const std::vector<Coefficients>& coeffs,
                                         const std::vector<PatchPair>& pairs,
                                         const EnergyConfig& config, GradCheckOptions options) {
    const std::vector<OperatorGradient> grads = grad_u_lambda(chain, coeffs, pairs, config);
    GradCheckResult out;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const LieOperator& op = chain[k];
        const Index n = op.size();
        auto energy_with = [&](const ComplexMatrix& u, const ComplexVector& lambda) {
            const TransformChain probe = chain.with_operator(k, LieOperator::from_eigen(u, lambda));
            return energy_total(probe, coeffs, pairs, config, {false, false}).total;
        };
        for (Index r = 0; r < n; ++r) {
            for (Index c = 0; c < n; ++c) {
                for (int part = 0; part < 2; ++part) {
                    const Complex unit = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
                    auto f = [&](double t) {
                        ComplexMatrix u = op.u();
                        u(r, c) += t * unit;
                        return energy_with(u, op.lambda());
                    };
                    const double numeric = central_difference(f, 0.0, options.step);
                    const Complex a = grads[k].u(r, c);
                    compare(part == 0 ? a.real() : a.imag(), numeric, options, out);
                }
            }
        }
        for (Index i = 0; i < n; ++i) {
            for (int part = 0; part < 2; ++part) {
                const Complex unit = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
                auto f = [&](double t) {
                    ComplexVector lambda = op.lambda();
                    lambda[i] += t * unit;
                    return energy_with(op.u(), lambda);
                };
                const double numeric = central_difference(f, 0.0, options.step);
                const Complex a = grads[k].lambda[i];
                compare(part == 0 ? a.real() : a.imag(), numeric, options, out);
            }
        }
    }
    return out;
}

GradCheckInstance random_gradcheck_instance(std::mt19937_64& rng, Index n, std::size_t k_ops,
                                            std::size_t samples) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<LieOperator> ops;
    for (std::size_t k = 0; k < k_ops; ++k) {
        ComplexMatrix u = ComplexMatrix::Identity(n, n);
        for (Index r = 0; r < n; ++r)
            for (Index c = 0; c < n; ++c) u(r, c) += random_complex(rng, 0.3);
        ComplexVector lambda(n);
        for (Index i = 0; i < n; ++i) {
            // Mostly oscillatory spectrum with mild growth/decay.
            lambda[i] = Complex(0.3 * normal(rng), normal(rng));
        }
        ops.push_back(LieOperator::from_eigen(std::move(u), std::move(lambda)));
    }

    GradCheckInstance inst;
    inst.chain = TransformChain(std::move(ops));
    inst.config = EnergyConfig::defaults(n);
    // Larger path-length and sigma weights than the defaults so that every
    // term contributes visibly to the checked gradients.
    inst.config.eta_d = 0.1;
    inst.config.eta_sigma = 0.05;
    for (Index i = 0; i < n; ++i) inst.config.mask[i] = unit(rng) < 0.8;
    inst.config.mask[0] = true;

    for (std::size_t t = 0; t < samples; ++t) {
        Coefficients c = Coefficients::zeros(k_ops);
        for (std::size_t k = 0; k < k_ops; ++k) {
            const double magnitude = 0.2 + 0.8 * unit(rng);
            c.mu[static_cast<Index>(k)] = unit(rng) < 0.5 ? -magnitude : magnitude;
            c.sigma[static_cast<Index>(k)] = 0.1 + 0.6 * unit(rng);
        }
        PatchPair p;
        p.src = RealVector::NullaryExpr(n, [&] { return normal(rng); });
        p.tgt = RealVector::NullaryExpr(n, [&] { return normal(rng); });
        p.id = t;
        inst.coeffs.push_back(std::move(c));
        inst.pairs.push_back(std::move(p));
    }
    return inst;
}

double GradCheckSuiteResult::max_rel_error() const {
    return std::max(coefficients.max_rel_error, operators.max_rel_error);
}

GradCheckSuiteResult run_gradcheck_suite(std::size_t instances, std::uint64_t seed,
                                         GradCheckOptions options) {
    static constexpr Index kSizes[] = {4, 6, 8};
    static constexpr std::size_t kChainLengths[] = {1, 2, 3};
    std::mt19937_64 rng(seed);
    GradCheckSuiteResult out;
    for (std::size_t i = 0; i < instances; ++i) {
        const Index n = kSizes[i % 3];
        const std::size_t k_ops = kChainLengths[(i / 3) % 3];
        GradCheckInstance inst = random_gradcheck_instance(rng, n, k_ops);
        // Alternate the path-length input convention across instances.
        if (i % 2 == 1) inst.config.convention = IntermediateConvention::EarlierIndicesActed;
        for (std::size_t t = 0; t < inst.pairs.size(); ++t) {
            out.coefficients.merge(check_coefficient_gradients(inst.chain, inst.coeffs[t],
                                                               inst.pairs[t], inst.config, options));
        }
        out.operators.merge(
            check_operator_gradients(inst.chain, inst.coeffs, inst.pairs, inst.config, options));
        ++out.instances;
    }
    return out;
}

}  // namespace lgt
