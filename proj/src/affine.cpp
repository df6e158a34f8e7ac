#include "lgt/affine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lgt/metrics.hpp"

namespace lgt {

namespace {

struct VelocityField {
    // v(x, y) = (vx, vy); divergence is constant for every affine kind.
    double (*vx)(double x, double y);
    double (*vy)(double x, double y);
    double divergence;
};

VelocityField velocity(AffineKind kind) {
    switch (kind) {
        case AffineKind::TranslateH:
            return {[](double, double) { return 1.0; }, [](double, double) { return 0.0; }, 0.0};
        case AffineKind::TranslateV:
            return {[](double, double) { return 0.0; }, [](double, double) { return 1.0; }, 0.0};
        case AffineKind::Rotate:
            return {[](double, double y) { return -y; }, [](double x, double) { return x; }, 0.0};
        case AffineKind::ScaleH:
            return {[](double x, double) { return x; }, [](double, double) { return 0.0; }, 1.0};
        case AffineKind::ScaleV:
            return {[](double, double) { return 0.0; }, [](double, double y) { return y; }, 1.0};
        case AffineKind::SkewH:
            return {[](double, double y) { return y; }, [](double, double) { return 0.0; }, 0.0};
    }
    throw Error("unknown affine kind");
}

// Central-difference derivative matrix along one axis.
RealMatrix difference_matrix(const PatchGrid& grid, bool horizontal) {
    const Index n = grid.size();
    RealMatrix d = RealMatrix::Zero(n, n);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            for (int step : {-1, 1}) {
                int rr = r, cc = c;
                (horizontal ? cc : rr) += step;
                const int extent = horizontal ? grid.width : grid.height;
                int& moving = horizontal ? cc : rr;
                if (moving < 0 || moving >= extent) {
                    if (grid.boundary == Boundary::Zero) continue;
                    moving = (moving + extent) % extent;
                }
                d(grid.index(r, c), grid.index(rr, cc)) += 0.5 * step;
            }
        }
    }
    return d;
}

double sample_bilinear(const RealVector& image, const PatchGrid& grid, double row, double col) {
    const double r0f = std::floor(row);
    const double c0f = std::floor(col);
    const double fr = row - r0f;
    const double fc = col - c0f;
    const int r0 = static_cast<int>(r0f);
    const int c0 = static_cast<int>(c0f);
    auto tap = [&](int r, int c) -> double {
        if (grid.boundary == Boundary::Periodic) {
            r = ((r % grid.height) + grid.height) % grid.height;
            c = ((c % grid.width) + grid.width) % grid.width;
        } else if (r < 0 || r >= grid.height || c < 0 || c >= grid.width) {
            return 0.0;
        }
        return image[grid.index(r, c)];
    };
    const double top = tap(r0, c0) * (1.0 - fc) + tap(r0, c0 + 1) * fc;
    const double bottom = tap(r0 + 1, c0) * (1.0 - fc) + tap(r0 + 1, c0 + 1) * fc;
    return top * (1.0 - fr) + bottom * fr;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma == 0.0) return {1.0};
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * i * i / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

}  // namespace

void PatchGrid::validate() const {
    if (width < 1 || height < 1 || size() < 3) {
        throw Error("patch grid needs at least 3 pixels and positive width and height");
    }
}

std::string_view name(AffineKind kind) {
    switch (kind) {
        case AffineKind::TranslateH: return "translate_h";
        case AffineKind::TranslateV: return "translate_v";
        case AffineKind::Rotate: return "rotate";
        case AffineKind::ScaleH: return "scale_h";
        case AffineKind::ScaleV: return "scale_v";
        case AffineKind::SkewH: return "skew_h";
    }
    return "unknown";
}

std::optional<AffineKind> parse_affine_kind(std::string_view text) {
    for (AffineKind k : kAffineKinds) {
        if (name(k) == text) return k;
    }
    return std::nullopt;
}

RealMatrix make_affine_generator(AffineKind kind, const PatchGrid& grid) {
    grid.validate();
    const Index n = grid.size();
    const VelocityField v = velocity(kind);
    RealVector vx(n), vy(n);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            vx[grid.index(r, c)] = v.vx(grid.x_of(c), grid.y_of(r));
            vy[grid.index(r, c)] = v.vy(grid.x_of(c), grid.y_of(r));
        }
    }
    const RealMatrix dx = difference_matrix(grid, true);
    const RealMatrix dy = difference_matrix(grid, false);
    RealMatrix a = -0.5 * (vx.asDiagonal() * dx + dx * vx.asDiagonal());
    a -= 0.5 * (vy.asDiagonal() * dy + dy * vy.asDiagonal());
    a.diagonal().array() += 0.5 * v.divergence;
    return a;
}

TransformChain make_affine_chain(const PatchGrid& grid) {
    std::vector<LieOperator> ops;
    for (AffineKind k : kAffineKinds) ops.push_back(make_operator(make_affine_generator(k, grid)));
    return TransformChain(std::move(ops));
}

RealVector warp_oracle(const AffineParams& p, const RealVector& image, const PatchGrid& grid) {
    grid.validate();
    if (image.size() != grid.size()) throw DimensionMismatch("image does not match grid");
    const double cos_r = std::cos(p[2]);
    const double sin_r = std::sin(p[2]);
    const double inv_sh = std::exp(-p[3]);
    const double inv_sv = std::exp(-p[4]);

    RealVector out(grid.size());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            double x = grid.x_of(c);
            double y = grid.y_of(r);
            // Undo the transforms from last-applied to first-applied.
            x -= p[0];
            y -= p[1];
            const double xr = cos_r * x + sin_r * y;
            const double yr = -sin_r * x + cos_r * y;
            x = xr * inv_sh;
            y = yr * inv_sv;
            x -= p[5] * y;
            const double col = x + 0.5 * (grid.width - 1);
            const double row = y + 0.5 * (grid.height - 1);
            out[grid.index(r, c)] = sample_bilinear(image, grid, row, col);
        }
    }
    return out;
}

AffineRange affine_range(AffineKind kind) {
    switch (kind) {
        case AffineKind::TranslateH:
        case AffineKind::TranslateV: return {-5.0, 5.0};
        case AffineKind::Rotate: return {-std::numbers::pi, std::numbers::pi};
        case AffineKind::ScaleH:
        case AffineKind::ScaleV: return {std::log(0.5), std::log(1.5)};
        case AffineKind::SkewH: return {-0.5, 0.5};
    }
    throw Error("unknown affine kind");
}

AffineParams sample_affine_coeffs(std::mt19937_64& rng) {
    AffineParams p{};
    for (std::size_t i = 0; i < kAffineKinds.size(); ++i) {
        const AffineRange range = affine_range(kAffineKinds[i]);
        p[i] = std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
    }
    return p;
}

LieOperator make_fourier_translation(Index n) {
    if (n < 1) throw Error("translation needs n >= 1");
    ComplexMatrix u(n, n);
    ComplexVector lambda(n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index k = 0; k < n; ++k) {
        for (Index j = 0; j < n; ++j) {
            const double phase = 2.0 * std::numbers::pi * static_cast<double>(j * k) /
                                 static_cast<double>(n);
            u(j, k) = norm * Complex(std::cos(phase), std::sin(phase));
        }
        // Wrap the frequency into (-pi, pi].
        double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        if (theta > std::numbers::pi) theta -= 2.0 * std::numbers::pi;
        lambda[k] = Complex(0.0, -theta);
    }
    return LieOperator::from_eigen(std::move(u), std::move(lambda), n % 2 == 1);
}

RealVector smooth_texture_patch(std::mt19937_64& rng, const PatchGrid& grid,
                                const TextureSpec& spec) {
    grid.validate();
    if (!(spec.blur_sigma >= 0.0)) throw Error("blur_sigma must be non-negative");
    const std::vector<double> k = gaussian_kernel(spec.blur_sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int fw = grid.width + 2 * radius;
    const int fh = grid.height + 2 * radius;

    std::normal_distribution<double> normal(0.0, 1.0);
    RealMatrix noise(fh, fw);
    for (int r = 0; r < fh; ++r)
        for (int c = 0; c < fw; ++c) noise(r, c) = normal(rng);

    // Separable filter, valid region only.
    RealMatrix rows = RealMatrix::Zero(fh, grid.width);
    for (int r = 0; r < fh; ++r)
        for (int c = 0; c < grid.width; ++c)
            for (int i = 0; i < static_cast<int>(k.size()); ++i)
                rows(r, c) += k[static_cast<std::size_t>(i)] * noise(r, c + i);
    RealMatrix field = RealMatrix::Zero(grid.height, grid.width);
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c)
            for (int i = 0; i < static_cast<int>(k.size()); ++i)
                field(r, c) += k[static_cast<std::size_t>(i)] * rows(r + i, c);

    // Filtered unit white noise has per-pixel variance (sum k_i^2)^2.
    double k_sq = 0.0;
    for (double v : k) k_sq += v * v;
    const double unit = 1.0 / k_sq;

    RealVector patch(grid.size());
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c)
            patch[grid.index(r, c)] = spec.mean + spec.contrast * unit * field(r, c);
    if (spec.remove_mean) patch.array() -= patch.mean();
    return patch;
}

double AffineRecoveryReport::fraction_psnr_above(double threshold) const {
    if (psnr.empty()) return 0.0;
    std::size_t above = 0;
    for (double v : psnr) above += v > threshold ? 1 : 0;
    return static_cast<double>(above) / static_cast<double>(psnr.size());
}

AffineRecoveryReport summarize_affine_recovery(const TransformChain& chain,
                                               std::vector<PatchPair> pairs,
                                               std::vector<Coefficients> truth,
                                               const BatchInference& inferred,
                                               const EnergyConfig& config) {
    AffineRecoveryReport report;
    std::vector<Coefficients> kept_truth;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        if (!inferred.results[t]) {
            ++report.skipped;
            continue;
        }
        const Coefficients& c = inferred.results[t]->coeffs;
        const RealVector recon = apply_chain(chain, c, pairs[t].src).y;
        report.psnr.push_back(psnr(recon, pairs[t].tgt, config.mask));
        report.inferred.push_back(c);
        kept_truth.push_back(truth[t]);
    }
    std::vector<bool> periodic(chain.size(), false);
    for (std::size_t k = 0; k < chain.size() && k < kAffineKinds.size(); ++k) {
        periodic[k] = kAffineKinds[k] == AffineKind::Rotate;
    }
    report.stats = coefficient_recovery_stats(kept_truth, report.inferred, periodic);
    report.truth = std::move(truth);
    report.pairs = std::move(pairs);
    return report;
}

AffineBatch synthetic_affine_batch(std::size_t n_patches, std::mt19937_64& rng,
                                   const AffineRecoveryOptions& options) {
    const PatchGrid& grid = options.grid;
    AffineBatch batch;
    for (std::size_t t = 0; t < n_patches; ++t) {
        const RealVector src = smooth_texture_patch(rng, grid, options.texture);
        AffineParams p{};
        if (!options.zero_coefficients) p = sample_affine_coeffs(rng);
        Coefficients c = Coefficients::zeros(kAffineKinds.size());
        for (std::size_t k = 0; k < p.size(); ++k) c.mu[static_cast<Index>(k)] = p[k];
        batch.pairs.push_back({src, warp_oracle(p, src, grid), t});
        batch.truth.push_back(std::move(c));
    }
    return batch;
}

AffineRecoveryReport run_affine_recovery(std::size_t n_patches, std::mt19937_64& rng,
                                         const InferencePolicy& policy,
                                         const AffineRecoveryOptions& options) {
    const TransformChain chain = make_affine_chain(options.grid);
    AffineBatch batch = synthetic_affine_batch(n_patches, rng, options);
    const EnergyConfig config = EnergyConfig::defaults(options.grid.size());
    const BatchInference inferred = infer_batch(chain, batch.pairs, config, policy);
    return summarize_affine_recovery(chain, std::move(batch.pairs), std::move(batch.truth),
                                     inferred, config);
}

}  // namespace lgt
