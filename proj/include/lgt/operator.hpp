#pragma once

#include <vector>

#include "lgt/types.hpp"

namespace lgt {

/// Largest real part allowed in a kernel exponent before the application is
/// rejected as divergent (e^709 is the double-precision limit).
inline constexpr double kExponentGuard = 700.0;

/// One transformation generator A = U diag(lambda) U^-1 acting on n-pixel
/// patches. Values are immutable; the inverse is computed once at
/// construction via partial-pivot LU.
class LieOperator {
public:
    /// Builds an operator from an eigenbasis. Throws NonDiagonalizable when U
    /// is numerically singular (reciprocal condition < 1e-12) or when the
    /// computed inverse is incoherent with U.
    static LieOperator from_eigen(ComplexMatrix u, ComplexVector lambda, bool real_valued = false);

    Index size() const noexcept { return lambda_.size(); }
    const ComplexMatrix& u() const noexcept { return u_; }
    const ComplexVector& lambda() const noexcept { return lambda_; }
    const ComplexMatrix& u_inv() const noexcept { return u_inv_; }

    /// True when the operator was built from a real generator matrix.
    bool real_valued() const noexcept { return real_valued_; }
    double reciprocal_condition() const noexcept { return rcond_; }

    /// Largest |lambda_i|; zero for the identity generator.
    double spectral_radius() const;

private:
    LieOperator() = default;

    ComplexMatrix u_;
    ComplexVector lambda_;
    ComplexMatrix u_inv_;
    double rcond_ = 0.0;
    bool real_valued_ = false;
};

/// Ordered product T_1 T_2 ... T_K. Evaluation is right to left: T_K acts on
/// the input first and T_1 acts last.
class TransformChain {
public:
    TransformChain() = default;
    explicit TransformChain(std::vector<LieOperator> ops);

    std::size_t size() const noexcept { return ops_.size(); }
    bool empty() const noexcept { return ops_.empty(); }
    Index dim() const noexcept { return ops_.empty() ? 0 : ops_.front().size(); }

    const LieOperator& operator[](std::size_t k) const { return ops_[k]; }
    const std::vector<LieOperator>& ops() const noexcept { return ops_; }

    /// Copy of this chain with operator k replaced.
    TransformChain with_operator(std::size_t k, LieOperator op) const;

private:
    std::vector<LieOperator> ops_;
};

/// Per-operator coefficients: mu is the transformation amount, sigma the
/// width of the Gaussian average over the transformation coordinate.
struct Coefficients {
    RealVector mu;
    RealVector sigma;

    static Coefficients zeros(std::size_t k);
    std::size_t size() const noexcept { return static_cast<std::size_t>(mu.size()); }
    void validate(std::size_t k) const;
};

/// Which operators have already acted on the patch handed to the manifold
/// penalty of operator k.
enum class IntermediateConvention {
    /// Operators k+1..K (the ones applied before k in right-to-left order).
    LaterIndicesActed,
    /// Operators 1..k-1, applied to the original patch as the product
    /// T_1 ... T_{k-1} x.
    EarlierIndicesActed,
};

/// Diagonal kernel exp(mu*lambda + lambda^2 sigma^2 / 2). Throws Overflow
/// when any exponent has real part above kExponentGuard.
ComplexVector smoothing_kernel(const LieOperator& op, double mu, double sigma);

/// Eigen-decomposes a real generator matrix.
LieOperator make_operator(const RealMatrix& a);

/// Re(U e^{s Lambda} U^-1 x).
RealVector apply_exact(const LieOperator& op, double s, const RealVector& x);

/// Re(U e^{mu Lambda} e^{Lambda^2 sigma^2 / 2} U^-1 x).
RealVector apply_smoothed(const LieOperator& op, double mu, double sigma, const RealVector& x);

/// Complex-valued application before projection; used for residual reporting.
ComplexVector apply_smoothed_complex(const LieOperator& op, double mu, double sigma,
                                     const RealVector& x);

/// Euclidean norm of the imaginary part dropped by apply_smoothed.
double imaginary_residual(const LieOperator& op, double mu, double sigma, const RealVector& x);

struct ChainApplication {
    RealVector y;
    /// intermediates[k] is the patch handed to operator k's manifold penalty.
    std::vector<RealVector> intermediates;
};

ChainApplication apply_chain(const TransformChain& chain, const Coefficients& coeffs,
                             const RealVector& x,
                             IntermediateConvention convention =
                                 IntermediateConvention::LaterIndicesActed);

struct ReconstructedGenerator {
    RealMatrix a;
    /// Max-abs of the imaginary part of U Lambda U^-1.
    double imag_residual = 0.0;
};

ReconstructedGenerator reconstruct_a(const LieOperator& op);

}  // namespace lgt
