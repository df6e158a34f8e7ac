#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <doctest.h>

#include "lgt/optimize.hpp"
#include "oracles.hpp"

using namespace lgt;

namespace {

Objective quadratic(const RealMatrix& h, const RealVector& b) {
    return [h, b](const RealVector& x, RealVector& g) {
        g = h * x - b;
        return 0.5 * x.dot(h * x) - b.dot(x);
    };
}

double rosenbrock(const RealVector& x, RealVector& g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
}

}  // namespace

TEST_CASE("minimize: quadratic bowl converges to its centre") {
    const RealVector c = (RealVector(3) << 1.0, 2.0, 3.0).finished();
    const Objective f = [&](const RealVector& x, RealVector& g) {
        g = 2.0 * (x - c);
        return (x - c).squaredNorm();
    };
    const MinimizeResult r = minimize(f, RealVector::Zero(3), MinimizeSpec::inference());
    CHECK((r.x - c).norm() < 1e-8);
    CHECK(r.iterations <= 10);
    CHECK(r.converged());
}

TEST_CASE("minimize: Rosenbrock from (-1.2, 1)") {
    MinimizeSpec spec;
    spec.max_iters = 200;
    spec.grad_tol = 1e-10;
    const MinimizeResult r = minimize(rosenbrock, (RealVector(2) << -1.2, 1.0).finished(), spec);
    CHECK(r.f < 1e-8);
    CHECK(r.iterations <= 200);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-4);
    CHECK(std::abs(r.x[1] - 1.0) < 1e-4);
}

TEST_CASE("minimize: constant objective stops at once") {
    const Objective f = [](const RealVector& x, RealVector& g) {
        g = RealVector::Zero(x.size());
        return 4.0;
    };
    const RealVector x0 = (RealVector(2) << 0.3, -0.7).finished();
    const MinimizeResult r = minimize(f, x0, MinimizeSpec::inference());
    CHECK(r.x == x0);
    CHECK(r.iterations == 0);
    CHECK(r.reason == StopReason::GradientTolerance);
}

TEST_CASE("minimize: convex quadratics converge in at most d + 2 iterations") {
    std::mt19937_64 rng(1);
    for (int d : {2, 5, 8, 10}) {
        const RealMatrix m = oracle::gaussian_matrix(rng, d, d);
        const RealMatrix h = m * m.transpose() + RealMatrix::Identity(d, d);
        const RealVector b = oracle::white_noise(rng, d);
        MinimizeSpec spec;
        spec.grad_tol = 1e-10;
        spec.f_rel_tol = 0.0;
        const MinimizeResult r = minimize(quadratic(h, b), RealVector::Zero(d), spec);
        CHECK(r.grad.lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK(r.iterations <= d + 2);
    }
}

TEST_CASE("minimize: accepted iterates satisfy sufficient decrease") {
    MinimizeSpec spec;
    spec.max_iters = 100;
    const MinimizeResult r = minimize(rosenbrock, (RealVector(2) << -1.2, 1.0).finished(), spec);
    REQUIRE(r.trace.size() >= 2);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].f < r.trace[i - 1].f);
}

TEST_CASE("minimize: identical inputs give identical iterates") {
    const RealVector x0 = (RealVector(2) << -1.2, 1.0).finished();
    const MinimizeResult a = minimize(rosenbrock, x0, MinimizeSpec::inference());
    const MinimizeResult b = minimize(rosenbrock, x0, MinimizeSpec::inference());
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].f == b.trace[i].f);
    CHECK(a.x == b.x);
}

TEST_CASE("minimize: non-finite start is rejected, infeasible probes shorten the step") {
    const Objective bad = [](const RealVector& x, RealVector& g) {
        g = x;
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(minimize(bad, RealVector::Zero(2), MinimizeSpec::inference()),
                    NonFiniteObjective);

    // f = (x - 3)^2 with a wall at x > 3.5: the first full steps overshoot.
    const Objective walled = [](const RealVector& x, RealVector& g) {
        g.resize(1);
        if (x[0] > 3.5) return std::numeric_limits<double>::infinity();
        g[0] = 2.0 * (x[0] - 3.0);
        return (x[0] - 3.0) * (x[0] - 3.0);
    };
    const MinimizeResult r = minimize(walled, RealVector::Zero(1), MinimizeSpec::inference());
    CHECK(std::abs(r.x[0] - 3.0) < 1e-6);
}

TEST_CASE("minimize: f never rises above the start") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const RealVector x0 = 2.0 * oracle::white_noise(rng, 2);
        RealVector g;
        const double f0 = rosenbrock(x0, g);
        CHECK(minimize(rosenbrock, x0, MinimizeSpec::m_step()).f <= f0);
    }
}

TEST_CASE("MinimizeSpec: defaults and validation") {
    const MinimizeSpec s = MinimizeSpec::inference();
    CHECK(s.memory == 10);
    CHECK(s.grad_tol == 1e-6);
    CHECK(s.c1 == 1e-4);
    CHECK(s.backtrack == 0.5);
    CHECK(s.max_iters == 300);
    CHECK(MinimizeSpec::m_step().max_iters == 50);
    MinimizeSpec bad = s;
    bad.c1 = 1.0;
    CHECK_THROWS(bad.validate());
    bad = s;
    bad.memory = 0;
    CHECK_THROWS(bad.validate());
    bad = s;
    bad.backtrack = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("minimize: trace CSV") {
    const MinimizeResult r = minimize(rosenbrock, (RealVector(2) << 0.0, 0.0).finished(),
                                      MinimizeSpec::inference());
    std::ostringstream out;
    write_trace_csv(out, r);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "iter,f,grad_norm,step_size");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == r.trace.size());
}
