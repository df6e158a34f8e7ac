#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "lgt/affine.hpp"
#include "lgt/metrics.hpp"
#include "oracles.hpp"

using namespace lgt;

namespace {

// Sum of isotropic Gaussian bumps (x0, y0, width) in centred coordinates.
RealVector blobs(const PatchGrid& grid, std::initializer_list<std::array<double, 3>> bumps) {
    RealVector img = RealVector::Zero(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            for (const auto& b : bumps) {
                const double dx = grid.x_of(c) - b[0], dy = grid.y_of(r) - b[1];
                img[grid.index(r, c)] += std::exp(-(dx * dx + dy * dy) / (2.0 * b[2] * b[2]));
            }
        }
    }
    return img;
}

AffineParams only(AffineKind kind, double value) {
    AffineParams p{};
    p[static_cast<std::size_t>(std::find(kAffineKinds.begin(), kAffineKinds.end(), kind) -
                               kAffineKinds.begin())] = value;
    return p;
}

double psnr_full(const RealVector& a, const RealVector& b) { return psnr(a, b, full_mask(a.size())); }

}  // namespace

TEST_CASE("affine kinds: names round-trip") {
    for (AffineKind k : kAffineKinds) CHECK(parse_affine_kind(name(k)) == k);
    CHECK(!parse_affine_kind("shear"));
}

TEST_CASE("sample_affine_coeffs: ranges, means and coverage") {
    std::mt19937_64 rng(1);
    const int draws = 20000;
    std::array<double, 6> sum{}, lo, hi;
    lo.fill(1e9);
    hi.fill(-1e9);
    for (int i = 0; i < draws; ++i) {
        const AffineParams p = sample_affine_coeffs(rng);
        for (std::size_t k = 0; k < 6; ++k) {
            sum[k] += p[k];
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    for (std::size_t k = 0; k < 6; ++k) {
        const AffineRange r = affine_range(kAffineKinds[k]);
        const double width = r.hi - r.lo;
        CHECK(lo[k] >= r.lo);
        CHECK(hi[k] <= r.hi);
        CHECK(lo[k] < r.lo + 0.01 * width);
        CHECK(hi[k] > r.hi - 0.01 * width);
        // Uniform mean, 5 standard errors.
        const double se = width / std::sqrt(12.0 * draws);
        CHECK(std::abs(sum[k] / draws - 0.5 * (r.lo + r.hi)) < 5.0 * se);
    }
    CHECK(affine_range(AffineKind::ScaleH).lo == doctest::Approx(std::log(0.5)));
    CHECK(affine_range(AffineKind::Rotate).hi == doctest::Approx(std::numbers::pi));
}

TEST_CASE("warp_oracle: zero, integer periodic shift, half turn") {
    std::mt19937_64 rng(2);
    const PatchGrid periodic{7, 5, Boundary::Periodic};
    const RealVector x = oracle::white_noise(rng, periodic.size());
    CHECK(warp_oracle(AffineParams{}, x, periodic) == x);

    const RealVector shifted = warp_oracle(only(AffineKind::TranslateH, 2.0), x, periodic);
    const RealVector down = warp_oracle(only(AffineKind::TranslateV, -1.0), x, periodic);
    for (int r = 0; r < periodic.height; ++r) {
        for (int c = 0; c < periodic.width; ++c) {
            CHECK(shifted[periodic.index(r, (c + 2) % 7)] == doctest::Approx(x[periodic.index(r, c)]));
            CHECK(down[periodic.index((r + 4) % 5, c)] == doctest::Approx(x[periodic.index(r, c)]));
        }
    }

    const PatchGrid odd{7, 5, Boundary::Zero};
    const RealVector turned = warp_oracle(only(AffineKind::Rotate, std::numbers::pi), x, odd);
    for (int r = 0; r < odd.height; ++r) {
        for (int c = 0; c < odd.width; ++c) {
            CHECK(std::abs(turned[odd.index(4 - r, 6 - c)] - x[odd.index(r, c)]) < 1e-12);
        }
    }
}

TEST_CASE("generators agree with the warp oracle for small coefficients") {
    const PatchGrid grid{15, 15, Boundary::Zero};
    const RealVector img = blobs(grid, {{{1.0, -0.5, 1.8}}});
    for (AffineKind k : kAffineKinds) {
        const LieOperator op = make_operator(make_affine_generator(k, grid));
        for (double c : {-0.5, 0.25, 0.5}) {
            const double db = psnr_full(apply_exact(op, c, img), warp_oracle(only(k, c), img, grid));
            INFO(name(k) << " c=" << c << " psnr=" << db);
            CHECK(db > 30.0);
        }
    }
}

TEST_CASE("generators: periodic translations commute, all kinds normal") {
    const PatchGrid periodic{6, 5, Boundary::Periodic};
    const RealMatrix h = make_affine_generator(AffineKind::TranslateH, periodic);
    const RealMatrix v = make_affine_generator(AffineKind::TranslateV, periodic);
    CHECK((h * v - v * h).cwiseAbs().maxCoeff() < 1e-10);

    const PatchGrid zero{6, 5, Boundary::Zero};
    for (AffineKind k : kAffineKinds) {
        const RealMatrix a = make_affine_generator(k, zero);
        CHECK((a * a.transpose() - a.transpose() * a).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("translation stencil has the central-difference spectrum") {
    // On a periodic row, -D has eigenvalues -i sin(2 pi k / n).
    const int n = 16;
    const PatchGrid row{n, 1, Boundary::Periodic};
    const LieOperator op = make_operator(make_affine_generator(AffineKind::TranslateH, row));
    std::vector<double> got, want;
    for (Index i = 0; i < n; ++i) {
        CHECK(std::abs(op.lambda()[i].real()) < 1e-12);
        got.push_back(op.lambda()[i].imag());
        want.push_back(-std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / n));
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("rotation: a full turn returns a band-limited patch on a periodic grid") {
    const PatchGrid grid{21, 21, Boundary::Periodic};
    const LieOperator rot = make_operator(make_affine_generator(AffineKind::Rotate, grid));
    const RealVector img = blobs(grid, {{{1.5, 0.0, 3.0}}});
    const double db = psnr_full(apply_exact(rot, 2.0 * std::numbers::pi, img), img);
    INFO("full turn psnr " << db);
    CHECK(db > 30.0);
}

TEST_CASE("rotation: a quarter turn maps a plus onto its rotation") {
    // Arms with Gaussian profiles: central differences cannot carry
    // one-pixel-wide edges through a rotation.
    const PatchGrid grid{11, 11, Boundary::Zero};
    RealVector plus(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const double x = grid.x_of(c), y = grid.y_of(r);
            plus[grid.index(r, c)] = std::exp(-x * x / 8.0 - y * y / 2.0) + std::exp(-x * x / 2.0 - y * y / 8.0);
        }
    }
    const RealVector exact = warp_oracle(only(AffineKind::Rotate, std::numbers::pi / 2), plus, grid);
    CHECK(psnr_full(exact, plus) > 60.0);
    const LieOperator rot = make_operator(make_affine_generator(AffineKind::Rotate, grid));
    const double db = psnr_full(apply_exact(rot, std::numbers::pi / 2, plus), exact);
    INFO("quarter turn psnr " << db);
    CHECK(db > 25.0);
}

TEST_CASE("smooth_texture_patch: moments and determinism") {
    const PatchGrid grid{32, 32, Boundary::Zero};
    std::mt19937_64 a(3), b(3);
    const RealVector x = smooth_texture_patch(a, grid, {0.0, 0.2, 0.5, false});
    CHECK(x == smooth_texture_patch(b, grid, {0.0, 0.2, 0.5, false}));
    CHECK(x.mean() == doctest::Approx(0.5).epsilon(0.05));
    const double sd = std::sqrt((x.array() - x.mean()).square().mean());
    CHECK(sd == doctest::Approx(0.2).epsilon(0.1));
    const RealVector centred = smooth_texture_patch(a, grid, {2.0, 0.15, 0.5, true});
    CHECK(std::abs(centred.mean()) < 1e-12);
}

TEST_CASE("synthetic_affine_batch: targets are oracle warps of the sources") {
    std::mt19937_64 a(4), b(4);
    const AffineBatch batch = synthetic_affine_batch(3, a);
    const AffineBatch again = synthetic_affine_batch(3, b);
    REQUIRE(batch.pairs.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
        AffineParams p;
        for (std::size_t k = 0; k < 6; ++k) p[k] = batch.truth[t].mu[static_cast<Index>(k)];
        CHECK(batch.pairs[t].tgt == warp_oracle(p, batch.pairs[t].src, AffineRecoveryOptions{}.grid));
        CHECK(batch.pairs[t].src == again.pairs[t].src);
        CHECK(batch.truth[t].sigma.isZero());
    }
}

TEST_CASE("run_affine_recovery: identical frames recover zero coefficients") {
    std::mt19937_64 rng(5);
    AffineRecoveryOptions options;
    options.zero_coefficients = true;
    const AffineRecoveryReport r = run_affine_recovery(5, rng, InferencePolicy{}, options);
    CHECK(r.skipped == 0);
    CHECK(r.stats.aggregate == 1.0);
    CHECK(r.fraction_psnr_above(60.0) == 1.0);
    for (double db : r.psnr) CHECK(db <= kPsnrCap);
}

TEST_CASE("PatchGrid: validation") {
    CHECK_THROWS(PatchGrid{1, 2, Boundary::Zero}.validate());
    CHECK_THROWS(PatchGrid{0, 5, Boundary::Zero}.validate());
    CHECK_NOTHROW(PatchGrid{3, 1, Boundary::Periodic}.validate());
    CHECK_THROWS_AS(warp_oracle(AffineParams{}, RealVector::Zero(5), PatchGrid{3, 3, Boundary::Zero}),
                    DimensionMismatch);
}
