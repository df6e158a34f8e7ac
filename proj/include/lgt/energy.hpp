#pragma once

#include <string>
#include <vector>

#include "lgt/operator.hpp"

namespace lgt {

/// Weights of the three energy terms plus the reconstruction mask.
///
///   E = eta_n   * sum_t |mask .* (x_tgt - T_multi x_src)|^2
///     + eta_d   * sum_t sum_k |mu_k| |Re(A_k e^{A_k mu_k / 2} y_k)|
///     + eta_sigma * sum_t sum_k sigma_k^2
///
/// where y_k is the patch handed to operator k's path-length penalty (see
/// IntermediateConvention).
struct EnergyConfig {
    double eta_n = 1.0;
    double eta_d = 0.005;
    double eta_sigma = 0.01;
    Mask mask;
    IntermediateConvention convention = IntermediateConvention::LaterIndicesActed;

    /// Default weights with every pixel scored.
    static EnergyConfig defaults(Index n);
    void validate(Index n) const;
};

struct PatchPair {
    RealVector src;  // frame t
    RealVector tgt;  // frame t+1
    std::size_t id = 0;
};

/// Complex gradient of a real loss with respect to one operator's free
/// parameters. For a parameter p = a + ib the stored value is
/// dE/da + i dE/db.
struct OperatorGradient {
    ComplexMatrix u;
    ComplexVector lambda;

    static OperatorGradient zeros(Index n);
};

struct GradientRequest {
    bool coefficients = true;
    bool operators = false;
};

struct EnergyReport {
    double total = 0.0;
    double recon_term = 0.0;     // unweighted sum of squared masked residuals
    double manifold_term = 0.0;  // unweighted sum of path-length estimates
    double sigma_term = 0.0;     // unweighted sum of sigma^2
    std::vector<RealVector> g_mu;     // per sample
    std::vector<RealVector> g_sigma;  // per sample
    std::vector<OperatorGradient> g_ops;  // per operator, summed over samples

    double coefficient_grad_norm() const;
    double operator_grad_norm() const;

    static std::string csv_header();
    /// total,recon,manifold,sigma,grad_coeff_norm,grad_op_norm
    std::string csv_line() const;
};

struct ReconstructionError {
    RealVector residual;
    double sq_norm = 0.0;
};

ReconstructionError reconstruction_error(const TransformChain& chain, const Coefficients& coeffs,
                                         const PatchPair& pair, const Mask& mask);

/// Sum over operators of |mu_k| * |Re(A_k e^{A_k mu_k / 2} y_k)|_2, evaluated
/// in each operator's eigenbasis.
double manifold_distance(const TransformChain& chain, const Coefficients& coeffs,
                         const std::vector<RealVector>& intermediates);

/// Path-length estimate of a single operator acting on y0 for amount s.
double path_length(const LieOperator& op, double s, const RealVector& y0);

EnergyReport energy_total(const TransformChain& chain, const std::vector<Coefficients>& coeffs,
                          const std::vector<PatchPair>& pairs, const EnergyConfig& config,
                          GradientRequest request = {});

struct CoefficientGradient {
    RealVector g_mu;
    RealVector g_sigma;
};

/// Energy of a single pair, with gradients w.r.t. its coefficients only.
struct SampleEnergy {
    double total = 0.0;
    double recon = 0.0;
    double manifold = 0.0;
    double sigma_term = 0.0;
    CoefficientGradient grad;
};

SampleEnergy sample_energy(const TransformChain& chain, const Coefficients& coeffs,
                           const PatchPair& pair, const EnergyConfig& config,
                           bool with_gradient = true);

CoefficientGradient grad_mu_sigma(const TransformChain& chain, const Coefficients& coeffs,
                                  const PatchPair& pair, const EnergyConfig& config);

std::vector<OperatorGradient> grad_u_lambda(const TransformChain& chain,
                                            const std::vector<Coefficients>& coeffs,
                                            const std::vector<PatchPair>& pairs,
                                            const EnergyConfig& config);

}  // namespace lgt
