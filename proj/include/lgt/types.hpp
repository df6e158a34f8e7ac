#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lgt {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Pixel selection for the reconstruction term; true entries are scored.
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

inline Mask full_mask(Index n) { return Mask::Constant(n, true); }

// ---------------------------------------------------------------------------
// Errors. Every failure raised by the library derives from lgt::Error so the
// CLI can map categories onto stable exit codes.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigenvector matrix is numerically singular.
class NonDiagonalizable : public Error {
public:
    using Error::Error;
};

/// Exponent of a kernel entry exceeded the guard; the coefficient is rejected.
class Overflow : public Error {
public:
    Overflow(const std::string& what, std::ptrdiff_t op_index = -1)
        : Error(what), op_index_(op_index) {}
    std::ptrdiff_t op_index() const noexcept { return op_index_; }

private:
    std::ptrdiff_t op_index_;
};

class NonFiniteObjective : public Error {
public:
    using Error::Error;
};

class AllRestartsFailed : public Error {
public:
    using Error::Error;
};

class DegenerateColumn : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed or unexpected file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadFrame : public Error {
public:
    using Error::Error;
};

class EmptyDir : public Error {
public:
    using Error::Error;
};

class MissingModelFile : public Error {
public:
    using Error::Error;
};

}  // namespace lgt
