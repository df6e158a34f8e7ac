#include "lgt/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>

namespace lgt {

namespace {

struct Probe {
    double f = std::numeric_limits<double>::quiet_NaN();
    RealVector g;
    bool ok = false;
};

Probe evaluate(const Objective& f, const RealVector& x, int& evaluations) {
    Probe p;
    p.g = RealVector::Zero(x.size());
    ++evaluations;
    try {
        p.f = f(x, p.g);
    } catch (const Error&) {
        return p;
    }
    p.ok = std::isfinite(p.f) && p.g.size() == x.size() && p.g.allFinite();
    return p;
}

struct CurvaturePair {
    RealVector s;
    RealVector y;
    double rho;
};

RealVector two_loop(const std::deque<CurvaturePair>& mem, const RealVector& g) {
    RealVector q = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * mem[i].s.dot(q);
        q -= alpha[i] * mem[i].y;
    }
    if (!mem.empty()) {
        const auto& last = mem.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * mem[i].y.dot(q);
        q += (alpha[i] - beta) * mem[i].s;
    }
    return -q;
}

double inf_norm(const RealVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

void MinimizeSpec::validate() const {
    if (max_iters < 1) throw Error("max_iters must be >= 1");
    if (!(c1 > 0.0 && c1 < 1.0)) throw Error("c1 must lie in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw Error("backtrack must lie in (0, 1)");
    if (memory < 1) throw Error("memory must be >= 1");
    if (max_line_search < 1) throw Error("max_line_search must be >= 1");
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::GradientTolerance: return "grad_tol";
        case StopReason::FunctionTolerance: return "f_tol";
        case StopReason::MaxIterations: return "max_iters";
        case StopReason::LineSearchFailed: return "line_search_failed";
    }
    return "unknown";
}

bool MinimizeResult::converged() const {
    return reason == StopReason::GradientTolerance || reason == StopReason::FunctionTolerance;
}

MinimizeResult minimize(const Objective& f, RealVector x0, const MinimizeSpec& spec) {
    spec.validate();
    MinimizeResult res;
    Probe cur = evaluate(f, x0, res.evaluations);
    if (!cur.ok) throw NonFiniteObjective("objective or gradient is not finite at the start point");

    res.x = std::move(x0);
    res.f = cur.f;
    res.grad = cur.g;
    res.trace.push_back({0, res.f, inf_norm(res.grad), 0.0});

    std::deque<CurvaturePair> memory;
    res.reason = StopReason::MaxIterations;
    for (int iter = 1; iter <= spec.max_iters; ++iter) {
        if (inf_norm(res.grad) < spec.grad_tol) {
            res.reason = StopReason::GradientTolerance;
            break;
        }

        RealVector d = two_loop(memory, res.grad);
        double slope = res.grad.dot(d);
        if (!(slope < 0.0)) {
            memory.clear();
            d = -res.grad;
            slope = -res.grad.squaredNorm();
        }
        double t = memory.empty() ? std::min(1.0, 1.0 / inf_norm(res.grad)) : 1.0;

        // Backtracking with safeguarded quadratic interpolation.
        Probe trial;
        bool accepted = false;
        for (int ls = 0; ls < spec.max_line_search; ++ls) {
            trial = evaluate(f, res.x + t * d, res.evaluations);
            if (trial.ok && trial.f <= res.f + spec.c1 * t * slope) {
                accepted = true;
                break;
            }
            double next = spec.backtrack * t;
            if (trial.ok) {
                const double denom = 2.0 * (trial.f - res.f - slope * t);
                if (denom > 0.0) {
                    const double tq = -slope * t * t / denom;
                    if (std::isfinite(tq)) next = std::clamp(tq, 0.1 * t, spec.backtrack * t);
                }
            }
            t = next;
        }
        if (!accepted) {
            res.reason = StopReason::LineSearchFailed;
            break;
        }

        // Secant refinement of the step along d.
        // phi'(0) = slope < 0 and phi'(t) = slope_t; the zero of the linear
        // interpolant of phi' is the exact line minimizer on a quadratic.
        const double slope_t = trial.g.dot(d);
        const double curvature = slope_t - slope;
        if (curvature > 0.0 && std::abs(slope_t) > 1e-10 * std::abs(slope)) {
            const double ts = -t * slope / curvature;
            if (std::isfinite(ts) && ts > 0.0 && std::abs(ts - t) > 1e-12 * t) {
                Probe refined = evaluate(f, res.x + ts * d, res.evaluations);
                if (refined.ok && refined.f < trial.f &&
                    refined.f <= res.f + spec.c1 * ts * slope) {
                    trial = std::move(refined);
                    t = ts;
                }
            }
        }

        RealVector s = t * d;
        RealVector y = trial.g - res.grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            memory.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(memory.size()) > spec.memory) memory.pop_front();
        }

        const double f_prev = res.f;
        res.x += t * d;
        res.f = trial.f;
        res.grad = std::move(trial.g);
        res.iterations = iter;
        res.trace.push_back({iter, res.f, inf_norm(res.grad), t});

        if (f_prev - res.f <= spec.f_rel_tol * std::max(1.0, std::abs(f_prev))) {
            res.reason = inf_norm(res.grad) < spec.grad_tol ? StopReason::GradientTolerance
                                                            : StopReason::FunctionTolerance;
            break;
        }
    }
    return res;
}

void write_trace_csv(std::ostream& out, const MinimizeResult& result) {
    out << "iter,f,grad_norm,step_size\n";
    out << std::setprecision(17);
    for (const auto& e : result.trace) {
        out << e.iter << ',' << e.f << ',' << e.grad_norm << ',' << e.step << '\n';
    }
}

}  // namespace lgt
