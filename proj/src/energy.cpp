#include "lgt/energy.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "lgt/parallel.hpp"

namespace lgt {

namespace {

// dE/dU for one factor is conj(sum of left * right^T); the outer products are
// formed only when the batch is reduced, in sample order.
struct RankOneTerm {
    ComplexVector left;
    ComplexVector right;
};

struct OperatorAccumulator {
    ComplexVector lambda;
    std::vector<RankOneTerm> terms;
};

struct SampleWork {
    double recon = 0.0;
    double manifold = 0.0;
    double sigma_term = 0.0;
    RealVector g_mu;
    RealVector g_sigma;
    std::vector<OperatorAccumulator> ops;  // empty unless operator gradients requested
};

// Forward record of one factor z = U diag(kernel) U^-1 u, y = Re z.
struct FactorRecord {
    RealVector input;
    ComplexVector coords;  // U^-1 u
    ComplexVector kernel;
};

FactorRecord forward_factor(const LieOperator& op, double mu, double sigma, const RealVector& u,
                            std::size_t index, RealVector& y) {
    FactorRecord rec;
    rec.input = u;
    try {
        rec.kernel = smoothing_kernel(op, mu, sigma);
    } catch (const Overflow& e) {
        throw Overflow(e.what(), static_cast<std::ptrdiff_t>(index));
    }
    rec.coords = op.u_inv() * u.cast<Complex>();
    y = (op.u() * rec.kernel.cwiseProduct(rec.coords)).real();
    return rec;
}

struct KernelDerivatives {
    ComplexVector d_lambda;  // elementwise d kernel_i / d lambda_i
    ComplexVector d_mu;
    ComplexVector d_sigma;  // may be empty
};

KernelDerivatives smoothing_derivatives(const LieOperator& op, double mu, double sigma,
                                        const ComplexVector& kernel) {
    const ComplexVector& l = op.lambda();
    const double var = sigma * sigma;
    KernelDerivatives d;
    d.d_lambda = (mu + var * l.array()).matrix().cwiseProduct(kernel);
    d.d_mu = l.cwiseProduct(kernel);
    d.d_sigma = (sigma * l.array().square()).matrix().cwiseProduct(kernel);
    return d;
}

// Pulls a real adjoint g (dE/dy) back through y = Re(U diag(kernel) U^-1 u).
// Accumulates coefficient gradients and, when acc is set, operator
// gradients; returns dE/du.
RealVector backprop_factor(const LieOperator& op, const RealVector& g, const ComplexVector& coords,
                           const ComplexVector& kernel, const KernelDerivatives& dk,
                           double& g_mu, double& g_sigma, OperatorAccumulator* acc) {
    const ComplexVector gc = g.cast<Complex>();
    const ComplexVector h = op.u().transpose() * gc;
    const ComplexVector hc = h.cwiseProduct(coords);
    g_mu += hc.cwiseProduct(dk.d_mu).sum().real();
    if (dk.d_sigma.size() > 0) g_sigma += hc.cwiseProduct(dk.d_sigma).sum().real();

    const ComplexVector r = op.u_inv().transpose() * kernel.cwiseProduct(h);
    if (acc != nullptr) {
        acc->lambda += hc.cwiseProduct(dk.d_lambda).conjugate();
        acc->terms.push_back({gc, kernel.cwiseProduct(coords)});
        acc->terms.push_back({-r, coords});
    }
    return r.real();
}

struct PathLengthRecord {
    double distance = 0.0;
    ComplexVector coords;
    ComplexVector kernel;  // lambda * exp(lambda mu / 2)
    KernelDerivatives dk;
    RealVector direction;  // w / |w|, zero if w = 0
};

PathLengthRecord path_length_record(const LieOperator& op, double mu, const RealVector& y0,
                                    std::size_t index) {
    const ComplexVector& l = op.lambda();
    const Index n = l.size();
    PathLengthRecord rec;
    ComplexVector half(n);
    for (Index i = 0; i < n; ++i) {
        const Complex e = 0.5 * mu * l[i];
        if (!(e.real() <= kExponentGuard)) {
            throw Overflow("path-length exponent exceeds guard", static_cast<std::ptrdiff_t>(index));
        }
        half[i] = std::exp(e);
    }
    rec.coords = op.u_inv() * y0.cast<Complex>();
    rec.kernel = l.cwiseProduct(half);
    const RealVector w = (op.u() * rec.kernel.cwiseProduct(rec.coords)).real();
    const double norm = w.norm();
    rec.distance = std::abs(mu) * norm;
    rec.direction = norm > 0.0 ? RealVector(w / norm) : RealVector(RealVector::Zero(n));
    rec.dk.d_lambda = (1.0 + 0.5 * mu * l.array()).matrix().cwiseProduct(half);
    rec.dk.d_mu = (0.5 * l.array().square()).matrix().cwiseProduct(half);
    return rec;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

SampleWork evaluate_sample(const TransformChain& chain, const Coefficients& coeffs,
                           const PatchPair& pair, const EnergyConfig& config,
                           GradientRequest request) {
    const std::size_t k_ops = chain.size();
    const Index n = chain.dim();
    coeffs.validate(k_ops);
    if (pair.src.size() != n || pair.tgt.size() != n) {
        throw DimensionMismatch("patch pair size does not match operators");
    }
    const bool want_grad = request.coefficients || request.operators;

    SampleWork work;
    work.g_mu = RealVector::Zero(static_cast<Index>(k_ops));
    work.g_sigma = RealVector::Zero(static_cast<Index>(k_ops));
    if (request.operators) {
        work.ops.resize(k_ops);
        for (auto& acc : work.ops) acc.lambda = ComplexVector::Zero(n);
    }
    auto acc_for = [&](std::size_t j) -> OperatorAccumulator* {
        return request.operators ? &work.ops[j] : nullptr;
    };
    auto mu_of = [&](std::size_t j) { return coeffs.mu[static_cast<Index>(j)]; };
    auto sigma_of = [&](std::size_t j) { return coeffs.sigma[static_cast<Index>(j)]; };

    // Forward through the chain, T_K first.
    std::vector<FactorRecord> factors(k_ops);
    RealVector y = pair.src;
    for (std::size_t j = k_ops; j-- > 0;) {
        RealVector next;
        factors[j] = forward_factor(chain[j], mu_of(j), sigma_of(j), y, j, next);
        y = std::move(next);
    }

    const RealVector mask = config.mask.cast<double>().matrix();
    const RealVector residual = mask.cwiseProduct(pair.tgt - y);
    work.recon = residual.squaredNorm();
    for (std::size_t j = 0; j < k_ops; ++j) work.sigma_term += sigma_of(j) * sigma_of(j);

    // Path-length penalty inputs under the chosen convention. For the
    // earlier-indices convention each input comes from its own sub-chain.
    std::vector<std::vector<FactorRecord>> sub_chains;
    std::vector<RealVector> path_inputs(k_ops);
    if (config.convention == IntermediateConvention::LaterIndicesActed) {
        for (std::size_t j = 0; j < k_ops; ++j) path_inputs[j] = factors[j].input;
    } else {
        sub_chains.resize(k_ops);
        for (std::size_t k = 0; k < k_ops; ++k) {
            RealVector z = pair.src;
            sub_chains[k].resize(k);
            for (std::size_t m = k; m-- > 0;) {
                RealVector next;
                sub_chains[k][m] = forward_factor(chain[m], mu_of(m), sigma_of(m), z, m, next);
                z = std::move(next);
            }
            path_inputs[k] = std::move(z);
        }
    }

    std::vector<RealVector> path_adjoint(k_ops);
    if (config.eta_d != 0.0) {
        for (std::size_t j = 0; j < k_ops; ++j) {
            const PathLengthRecord rec = path_length_record(chain[j], mu_of(j), path_inputs[j], j);
            work.manifold += rec.distance;
            if (!want_grad) continue;
            const double mu = mu_of(j);
            const double norm = rec.distance == 0.0 ? 0.0 : rec.distance / std::abs(mu);
            // d/dmu |mu| |w(mu)| = sign(mu) |w| + |mu| w_hat . dw/dmu
            double unused_sigma = 0.0;
            work.g_mu[static_cast<Index>(j)] += config.eta_d * sign_of(mu) * norm;
            const RealVector g = config.eta_d * std::abs(mu) * rec.direction;
            path_adjoint[j] = backprop_factor(chain[j], g, rec.coords, rec.kernel, rec.dk,
                                              work.g_mu[static_cast<Index>(j)], unused_sigma,
                                              acc_for(j));
        }
    }

    if (!want_grad) return work;

    // Reverse pass through the main chain, T_1 first.
    RealVector adjoint = -2.0 * config.eta_n * residual;
    const bool inject = config.convention == IntermediateConvention::LaterIndicesActed;
    for (std::size_t j = 0; j < k_ops; ++j) {
        const FactorRecord& f = factors[j];
        const auto dk = smoothing_derivatives(chain[j], mu_of(j), sigma_of(j), f.kernel);
        RealVector upstream =
            backprop_factor(chain[j], adjoint, f.coords, f.kernel, dk,
                            work.g_mu[static_cast<Index>(j)],
                            work.g_sigma[static_cast<Index>(j)], acc_for(j));
        // The input of operator j is the output of operator j+1.
        if (inject && path_adjoint[j].size() > 0) upstream += path_adjoint[j];
        adjoint = std::move(upstream);
    }

    // Earlier-indices convention: route each penalty's adjoint back through
    // the sub-chain that produced its input.
    if (!inject) {
        for (std::size_t k = 1; k < k_ops; ++k) {
            if (path_adjoint[k].size() == 0) continue;
            RealVector a = path_adjoint[k];
            for (std::size_t m = 0; m < k; ++m) {
                const FactorRecord& f = sub_chains[k][m];
                const auto dk = smoothing_derivatives(chain[m], mu_of(m), sigma_of(m), f.kernel);
                a = backprop_factor(chain[m], a, f.coords, f.kernel, dk,
                                    work.g_mu[static_cast<Index>(m)],
                                    work.g_sigma[static_cast<Index>(m)], acc_for(m));
            }
        }
    }

    for (std::size_t j = 0; j < k_ops; ++j) {
        work.g_sigma[static_cast<Index>(j)] += 2.0 * config.eta_sigma * sigma_of(j);
    }
    return work;
}

double weighted_total(const EnergyConfig& c, double recon, double manifold, double sigma_term) {
    return c.eta_n * recon + c.eta_d * manifold + c.eta_sigma * sigma_term;
}

}  // namespace

EnergyConfig EnergyConfig::defaults(Index n) {
    EnergyConfig c;
    c.mask = full_mask(n);
    return c;
}

void EnergyConfig::validate(Index n) const {
    if (eta_n < 0.0 || eta_d < 0.0 || eta_sigma < 0.0) {
        throw Error("energy weights must be non-negative");
    }
    if (mask.size() != n) throw DimensionMismatch("mask length does not match patch size");
    if (!mask.any()) throw Error("mask must select at least one pixel");
}

OperatorGradient OperatorGradient::zeros(Index n) {
    return {ComplexMatrix::Zero(n, n), ComplexVector::Zero(n)};
}

double EnergyReport::coefficient_grad_norm() const {
    double sq = 0.0;
    for (const auto& g : g_mu) sq += g.squaredNorm();
    for (const auto& g : g_sigma) sq += g.squaredNorm();
    return std::sqrt(sq);
}

double EnergyReport::operator_grad_norm() const {
    double sq = 0.0;
    for (const auto& g : g_ops) sq += g.u.squaredNorm() + g.lambda.squaredNorm();
    return std::sqrt(sq);
}

std::string EnergyReport::csv_header() {
    return "total,recon,manifold,sigma,grad_coeff_norm,grad_op_norm";
}

std::string EnergyReport::csv_line() const {
    std::ostringstream out;
    out << std::setprecision(17) << total << ',' << recon_term << ',' << manifold_term << ','
        << sigma_term << ',' << coefficient_grad_norm() << ',' << operator_grad_norm();
    return out.str();
}

ReconstructionError reconstruction_error(const TransformChain& chain, const Coefficients& coeffs,
                                         const PatchPair& pair, const Mask& mask) {
    if (mask.size() != chain.dim()) throw DimensionMismatch("mask length does not match patch");
    const ChainApplication app = apply_chain(chain, coeffs, pair.src);
    ReconstructionError out;
    out.residual = mask.cast<double>().matrix().cwiseProduct(pair.tgt - app.y);
    out.sq_norm = out.residual.squaredNorm();
    return out;
}

double path_length(const LieOperator& op, double s, const RealVector& y0) {
    return path_length_record(op, s, y0, 0).distance;
}

double manifold_distance(const TransformChain& chain, const Coefficients& coeffs,
                         const std::vector<RealVector>& intermediates) {
    coeffs.validate(chain.size());
    if (intermediates.size() != chain.size()) {
        throw DimensionMismatch("one intermediate patch per operator is required");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        total += path_length_record(chain[k], coeffs.mu[static_cast<Index>(k)], intermediates[k], k)
                     .distance;
    }
    return total;
}

EnergyReport energy_total(const TransformChain& chain, const std::vector<Coefficients>& coeffs,
                          const std::vector<PatchPair>& pairs, const EnergyConfig& config,
                          GradientRequest request) {
    if (coeffs.size() != pairs.size()) {
        throw DimensionMismatch("one coefficient set per pair is required");
    }
    config.validate(chain.dim());

    std::vector<SampleWork> works(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t t) {
        works[t] = evaluate_sample(chain, coeffs[t], pairs[t], config, request);
    });

    // Deterministic reduction in sample order.
    EnergyReport report;
    const bool want_grad = request.coefficients || request.operators;
    for (const auto& w : works) {
        report.recon_term += w.recon;
        report.manifold_term += w.manifold;
        report.sigma_term += w.sigma_term;
        if (want_grad) {
            report.g_mu.push_back(w.g_mu);
            report.g_sigma.push_back(w.g_sigma);
        }
    }
    report.total =
        weighted_total(config, report.recon_term, report.manifold_term, report.sigma_term);

    if (request.operators) {
        const Index n = chain.dim();
        for (std::size_t k = 0; k < chain.size(); ++k) {
            OperatorGradient g = OperatorGradient::zeros(n);
            std::size_t term_count = 0;
            for (const auto& w : works) {
                g.lambda += w.ops[k].lambda;
                term_count += w.ops[k].terms.size();
            }
            ComplexMatrix left(n, static_cast<Index>(term_count));
            ComplexMatrix right(n, static_cast<Index>(term_count));
            Index col = 0;
            for (const auto& w : works) {
                for (const auto& term : w.ops[k].terms) {
                    left.col(col) = term.left;
                    right.col(col) = term.right;
                    ++col;
                }
            }
            if (term_count > 0) g.u = (left * right.transpose()).conjugate();
            report.g_ops.push_back(std::move(g));
        }
    }
    return report;
}

SampleEnergy sample_energy(const TransformChain& chain, const Coefficients& coeffs,
                           const PatchPair& pair, const EnergyConfig& config, bool with_gradient) {
    config.validate(chain.dim());
    GradientRequest req{with_gradient, false};
    SampleWork w = evaluate_sample(chain, coeffs, pair, config, req);
    SampleEnergy out;
    out.recon = w.recon;
    out.manifold = w.manifold;
    out.sigma_term = w.sigma_term;
    out.total = weighted_total(config, w.recon, w.manifold, w.sigma_term);
    out.grad.g_mu = std::move(w.g_mu);
    out.grad.g_sigma = std::move(w.g_sigma);
    return out;
}

CoefficientGradient grad_mu_sigma(const TransformChain& chain, const Coefficients& coeffs,
                                  const PatchPair& pair, const EnergyConfig& config) {
    return sample_energy(chain, coeffs, pair, config, true).grad;
}

std::vector<OperatorGradient> grad_u_lambda(const TransformChain& chain,
                                            const std::vector<Coefficients>& coeffs,
                                            const std::vector<PatchPair>& pairs,
                                            const EnergyConfig& config) {
    return energy_total(chain, coeffs, pairs, config, {false, true}).g_ops;
}

}  // namespace lgt
