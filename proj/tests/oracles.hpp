#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library.

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series on the scaled matrix.
inline ComplexMatrix expm(const ComplexMatrix& a) {
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.125) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.125)));
    const ComplexMatrix b = a / std::ldexp(1.0, squarings);
    const auto n = a.rows();
    ComplexMatrix term = ComplexMatrix::Identity(n, n);
    ComplexMatrix sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = term * b / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

inline RealMatrix expm(const RealMatrix& a) {
    return expm(ComplexMatrix(a.cast<std::complex<double>>())).real();
}

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch for the Jacobi matrix of a three-term recurrence with zero
/// diagonal: nodes are eigenvalues, weights mu0 times squared first
/// eigenvector components.
inline Quadrature golub_welsch(int n, const std::function<double(int)>& offdiag, double mu0) {
    RealMatrix j = RealMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = offdiag(k);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(j);
    Quadrature q;
    for (int k = 0; k < n; ++k) {
        q.nodes.push_back(es.eigenvalues()[k]);
        q.weights.push_back(mu0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    }
    return q;
}

/// Nodes/weights for E[f(s)] with s ~ N(mu, sigma^2) (probabilists' form).
inline Quadrature gauss_hermite_normal(int n, double mu, double sigma) {
    // Physicists' Hermite weight e^{-x^2}: off-diagonals sqrt(k/2), mu0 = sqrt(pi).
    Quadrature q = golub_welsch(n, [](int k) { return std::sqrt(k / 2.0); }, std::sqrt(M_PI));
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        q.nodes[i] = mu + std::sqrt(2.0) * sigma * q.nodes[i];
        q.weights[i] /= std::sqrt(M_PI);
    }
    return q;
}

/// Gauss-Legendre nodes/weights on [a, b].
inline Quadrature gauss_legendre(int n, double a, double b) {
    Quadrature q = golub_welsch(
        n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        q.nodes[i] = 0.5 * (b - a) * q.nodes[i] + 0.5 * (a + b);
        q.weights[i] *= 0.5 * (b - a);
    }
    return q;
}

/// Central finite-difference gradient of f at x.
inline RealVector fd_gradient(const std::function<double(const RealVector&)>& f, RealVector x,
                              double h = 1e-6) {
    RealVector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Circular shift of a 1-D signal by an integer amount toward higher indices.
inline RealVector circular_shift(const RealVector& x, int s) {
    const auto n = x.size();
    RealVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[((i + s) % n + n) % n] = x[i];
    return y;
}

inline RealVector white_noise(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    RealVector x(n);
    for (auto& v : x) v = g(rng);
    return x;
}

inline RealMatrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g;
    RealMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
    }
    return m;
}

/// Local minima of a sampled curve: e[i] < e[i-1] and e[i] <= e[i+1].
inline int count_local_minima(const std::vector<double>& e) {
    int count = 0;
    for (std::size_t i = 1; i + 1 < e.size(); ++i) {
        if (e[i] < e[i - 1] && e[i] <= e[i + 1]) ++count;
    }
    return count;
}

}  // namespace oracle
