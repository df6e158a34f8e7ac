#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lgt/types.hpp"

namespace lgt {

/// Settings for the limited-memory quasi-Newton minimizer.
struct MinimizeSpec {
    int max_iters = 300;
    double grad_tol = 1e-6;     // stop when |grad|_inf < grad_tol
    int memory = 10;            // curvature pairs kept
    double c1 = 1e-4;           // sufficient-decrease constant
    double backtrack = 0.5;     // largest step shrink per failed trial
    int max_line_search = 40;   // trials per iteration
    double f_rel_tol = 1e-13;   // stop when an iteration improves f by less than this (relative)

    /// Defaults for per-pair coefficient inference.
    static MinimizeSpec inference() { return {}; }
    /// Defaults for one operator-learning step.
    static MinimizeSpec m_step() {
        MinimizeSpec s;
        s.max_iters = 50;
        return s;
    }
    void validate() const;
};

/// Objective with gradient. Returning a non-finite value, or throwing
/// lgt::Error, marks the probe point as infeasible; the line search then
/// shortens the step.
using Objective = std::function<double(const RealVector& x, RealVector& grad)>;

enum class StopReason {
    GradientTolerance,
    FunctionTolerance,
    MaxIterations,
    LineSearchFailed,
};

std::string to_string(StopReason reason);

struct TraceEntry {
    int iter = 0;
    double f = 0.0;
    double grad_norm = 0.0;  // inf-norm
    double step = 0.0;
};

struct MinimizeResult {
    RealVector x;
    double f = 0.0;
    RealVector grad;
    std::vector<TraceEntry> trace;
    StopReason reason = StopReason::MaxIterations;
    int iterations = 0;
    int evaluations = 0;

    /// True for gradient- or function-tolerance termination.
    bool converged() const;
};

/// L-BFGS with a backtracking Armijo line search. Each accepted step is
/// refined once by a secant estimate of the line minimizer when that lowers
/// f further, which makes the line search exact on quadratics.
///
/// Throws NonFiniteObjective when f or its gradient is not finite at x0.
/// Deterministic: identical inputs give identical iterate sequences.
MinimizeResult minimize(const Objective& f, RealVector x0, const MinimizeSpec& spec);

/// iter,f,grad_norm,step_size
void write_trace_csv(std::ostream& out, const MinimizeResult& result);

}  // namespace lgt
