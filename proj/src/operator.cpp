#include "lgt/operator.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace lgt {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;
constexpr double kInverseCoherence = 1e-8;

void check_input(const LieOperator& op, const RealVector& x) {
    if (x.size() != op.size()) {
        std::ostringstream msg;
        msg << "patch has " << x.size() << " pixels, operator expects " << op.size();
        throw DimensionMismatch(msg.str());
    }
}

}  // namespace

LieOperator LieOperator::from_eigen(ComplexMatrix u, ComplexVector lambda, bool real_valued) {
    const Index n = lambda.size();
    if (n < 1 || u.rows() != n || u.cols() != n) {
        throw DimensionMismatch("eigenvector matrix must be n x n with n = len(lambda) >= 1");
    }
    if (!u.allFinite() || !lambda.allFinite()) {
        throw NonDiagonalizable("eigenbasis contains non-finite entries");
    }

    Eigen::PartialPivLU<ComplexMatrix> lu(u);
    const double rcond = lu.rcond();
    if (!(rcond >= kMinReciprocalCondition)) {
        std::ostringstream msg;
        msg << "eigenvector matrix is numerically singular (rcond = " << rcond << ")";
        throw NonDiagonalizable(msg.str());
    }
    ComplexMatrix inv = lu.inverse();
    const double incoherence = (inv * u - ComplexMatrix::Identity(n, n)).norm();
    if (!(incoherence < kInverseCoherence)) {
        std::ostringstream msg;
        msg << "inverse of eigenvector matrix is inaccurate (|U^-1 U - I|_F = " << incoherence
            << ")";
        throw NonDiagonalizable(msg.str());
    }

    LieOperator op;
    op.u_ = std::move(u);
    op.lambda_ = std::move(lambda);
    op.u_inv_ = std::move(inv);
    op.rcond_ = rcond;
    op.real_valued_ = real_valued;
    return op;
}

double LieOperator::spectral_radius() const {
    return lambda_.size() == 0 ? 0.0 : lambda_.cwiseAbs().maxCoeff();
}

TransformChain::TransformChain(std::vector<LieOperator> ops) : ops_(std::move(ops)) {
    for (const auto& op : ops_) {
        if (op.size() != ops_.front().size()) {
            throw DimensionMismatch("all operators in a chain must act on the same patch size");
        }
    }
}

TransformChain TransformChain::with_operator(std::size_t k, LieOperator op) const {
    if (k >= ops_.size()) throw std::out_of_range("operator index out of range");
    if (op.size() != dim()) throw DimensionMismatch("replacement operator has wrong size");
    TransformChain copy = *this;
    copy.ops_[k] = std::move(op);
    return copy;
}

Coefficients Coefficients::zeros(std::size_t k) {
    const auto kk = static_cast<Index>(k);
    return {RealVector::Zero(kk), RealVector::Zero(kk)};
}

void Coefficients::validate(std::size_t k) const {
    const auto kk = static_cast<Index>(k);
    if (mu.size() != kk || sigma.size() != kk) {
        throw DimensionMismatch("coefficient count does not match chain length");
    }
    if (!mu.allFinite() || !sigma.allFinite()) throw Error("coefficients must be finite");
    if ((sigma.array() < 0.0).any()) throw Error("sigma must be non-negative");
}

ComplexVector smoothing_kernel(const LieOperator& op, double mu, double sigma) {
    const ComplexVector& lambda = op.lambda();
    const double half_var = 0.5 * sigma * sigma;
    ComplexVector kernel(lambda.size());
    for (Index i = 0; i < lambda.size(); ++i) {
        const Complex l = lambda[i];
        const Complex exponent = mu * l + half_var * l * l;
        if (!(exponent.real() <= kExponentGuard)) {
            std::ostringstream msg;
            msg << "kernel exponent " << exponent.real() << " exceeds guard at eigenvalue " << i;
            throw Overflow(msg.str());
        }
        kernel[i] = std::exp(exponent);
    }
    return kernel;
}

LieOperator make_operator(const RealMatrix& a) {
    const Index n = a.rows();
    if (n < 1 || a.cols() != n) throw DimensionMismatch("generator must be square with n >= 1");
    if (!a.allFinite()) throw NonDiagonalizable("generator has non-finite entries");

    const ComplexMatrix ac = a.cast<Complex>();
    const double scale = std::max(a.norm(), 1.0);

    // Normal matrices (skew-symmetric transport generators among them) are
    // unitarily diagonalizable; the Schur vectors stay orthonormal even inside
    // degenerate eigenspaces, which a general eigensolver does not promise.
    const double non_normality = (a * a.transpose() - a.transpose() * a).norm();
    if (non_normality <= 1e-12 * scale * scale) {
        Eigen::ComplexSchur<ComplexMatrix> schur(ac);
        if (schur.info() == Eigen::Success) {
            const ComplexMatrix& t = schur.matrixT();
            const double off = t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();
            if (off <= 1e-10 * scale) {
                return LieOperator::from_eigen(schur.matrixU(), t.diagonal(), true);
            }
        }
    }

    Eigen::ComplexEigenSolver<ComplexMatrix> solver(ac);
    if (solver.info() != Eigen::Success) {
        throw NonDiagonalizable("eigendecomposition did not converge");
    }
    LieOperator op = LieOperator::from_eigen(solver.eigenvectors(), solver.eigenvalues(), true);
    const double err = (reconstruct_a(op).a - a).norm();
    if (!(err <= 1e-8 * scale)) {
        std::ostringstream msg;
        msg << "generator is not diagonalizable to working precision (|A - U L U^-1|_F = " << err
            << ")";
        throw NonDiagonalizable(msg.str());
    }
    return op;
}

ComplexVector apply_smoothed_complex(const LieOperator& op, double mu, double sigma,
                                     const RealVector& x) {
    check_input(op, x);
    const ComplexVector kernel = smoothing_kernel(op, mu, sigma);
    const ComplexVector coords = op.u_inv() * x.cast<Complex>();
    return op.u() * kernel.cwiseProduct(coords);
}

RealVector apply_smoothed(const LieOperator& op, double mu, double sigma, const RealVector& x) {
    if (sigma < 0.0) throw Error("sigma must be non-negative");
    return apply_smoothed_complex(op, mu, sigma, x).real();
}

RealVector apply_exact(const LieOperator& op, double s, const RealVector& x) {
    if (!std::isfinite(s)) throw Error("coefficient must be finite");
    return apply_smoothed_complex(op, s, 0.0, x).real();
}

double imaginary_residual(const LieOperator& op, double mu, double sigma, const RealVector& x) {
    return apply_smoothed_complex(op, mu, sigma, x).imag().norm();
}

ChainApplication apply_chain(const TransformChain& chain, const Coefficients& coeffs,
                             const RealVector& x, IntermediateConvention convention) {
    const std::size_t k_ops = chain.size();
    coeffs.validate(k_ops);

    ChainApplication out;
    out.intermediates.resize(k_ops);
    RealVector y = x;
    for (std::size_t r = k_ops; r-- > 0;) {
        out.intermediates[r] = y;
        try {
            y = apply_smoothed(chain[r], coeffs.mu[static_cast<Index>(r)],
                               coeffs.sigma[static_cast<Index>(r)], y);
        } catch (const Overflow& e) {
            throw Overflow(e.what(), static_cast<std::ptrdiff_t>(r));
        }
    }
    out.y = std::move(y);

    if (convention == IntermediateConvention::EarlierIndicesActed) {
        // intermediates[k] = T_1 ... T_{k-1} x
        for (std::size_t k = 0; k < k_ops; ++k) {
            RealVector z = x;
            for (std::size_t m = k; m-- > 0;) {
                z = apply_smoothed(chain[m], coeffs.mu[static_cast<Index>(m)],
                                   coeffs.sigma[static_cast<Index>(m)], z);
            }
            out.intermediates[k] = std::move(z);
        }
    }
    return out;
}

ReconstructedGenerator reconstruct_a(const LieOperator& op) {
    const ComplexMatrix a = op.u() * op.lambda().asDiagonal() * op.u_inv();
    return {a.real(), a.imag().cwiseAbs().maxCoeff()};
}

}  // namespace lgt
