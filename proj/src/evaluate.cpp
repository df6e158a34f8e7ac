#include "lgt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "lgt/affine.hpp"
#include "lgt/metrics.hpp"
#include "lgt/operator_io.hpp"
#include "lgt/parallel.hpp"

namespace lgt {

namespace {

void check_radius(const PairGeometry& g, int radius) {
    g.validate();
    if (radius < 0) throw Error("search radius must be non-negative");
    if (radius > g.buffer_x() || radius > g.buffer_y()) {
        throw Error("search radius exceeds the buffer region");
    }
}

// Masked MSE of predicting tgt by src sampled at (row - qy/4, col - qx/4).
double shifted_mse(const PatchPair& pair, const PairGeometry& g, int qx, int qy) {
    const int bx = g.buffer_x();
    const int by = g.buffer_y();
    const int ix = qx >= 0 ? qx / 4 : -((-qx + 3) / 4);  // floor(qx / 4)
    const int iy = qy >= 0 ? qy / 4 : -((-qy + 3) / 4);
    const double fx = (qx - 4 * ix) / 4.0;  // fractional part in [0, 1)
    const double fy = (qy - 4 * iy) / 4.0;
    auto at = [&](int r, int c) { return pair.src[static_cast<Index>(r) * g.patch_w + c]; };

    double sum = 0.0;
    for (int r = by; r < by + g.mask_h; ++r) {
        for (int c = bx; c < bx + g.mask_w; ++c) {
            // Source position (r - iy - fy, c - ix - fx): interpolate between
            // the pixel at the integer part and its upper/left neighbour.
            const int r0 = r - iy;
            const int c0 = c - ix;
            double v = at(r0, c0);
            if (fx != 0.0 || fy != 0.0) {
                const double left = fx != 0.0 ? at(r0, c0 - 1) : 0.0;
                const double up = fy != 0.0 ? at(r0 - 1, c0) : 0.0;
                const double diag = (fx != 0.0 && fy != 0.0) ? at(r0 - 1, c0 - 1) : 0.0;
                v = (1 - fy) * ((1 - fx) * v + fx * left) + fy * ((1 - fx) * up + fx * diag);
            }
            const double d = pair.tgt[static_cast<Index>(r) * g.patch_w + c] - v;
            sum += d * d;
        }
    }
    return sum / (static_cast<double>(g.mask_w) * g.mask_h);
}

MotionMatch lattice_search(const PatchPair& pair, const PairGeometry& g, int radius, int step) {
    if (pair.src.size() != g.size() || pair.tgt.size() != g.size()) {
        throw DimensionMismatch("pair does not match the patch geometry");
    }
    struct Best {
        double mse;
        int norm2;
        int qx, qy;
    };
    std::optional<Best> best;
    const int q_radius = 4 * radius;
    for (int qy = -q_radius; qy <= q_radius; qy += step) {
        for (int qx = -q_radius; qx <= q_radius; qx += step) {
            const double mse = shifted_mse(pair, g, qx, qy);
            const int norm2 = qx * qx + qy * qy;
            // Row-major scan order already ranks (dy, dx) ascending, so only
            // strictly better candidates replace the incumbent.
            if (!best || mse < best->mse || (mse == best->mse && norm2 < best->norm2)) {
                best = Best{mse, norm2, qx, qy};
            }
        }
    }
    MotionMatch m;
    m.dx = best->qx / 4.0;
    m.dy = best->qy / 4.0;
    m.mse = best->mse;
    m.psnr = m.mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(1.0 / m.mse));
    return m;
}

}  // namespace

MotionMatch mc_full_pixel(const PatchPair& pair, const PairGeometry& geometry, int search_radius) {
    check_radius(geometry, search_radius);
    return lattice_search(pair, geometry, search_radius, 4);
}

MotionMatch mc_quarter_pixel(const PatchPair& pair, const PairGeometry& geometry,
                             int search_radius) {
    check_radius(geometry, search_radius);
    return lattice_search(pair, geometry, search_radius, 1);
}

std::string_view name(ModelConfigId id) {
    switch (id) {
        case ModelConfigId::NoTransform: return "no_transform";
        case ModelConfigId::McFullPixel: return "mc_full_pixel";
        case ModelConfigId::McQuarterPixel: return "mc_quarter_pixel";
        case ModelConfigId::ContTranslationNoSigma: return "cont_translation_no_sigma";
        case ModelConfigId::ContTranslationSigma: return "cont_translation_sigma";
        case ModelConfigId::TranslationPlusLearned: return "translation_plus_learned";
        case ModelConfigId::Learned15: return "learned_15";
    }
    return "unknown";
}

std::optional<ModelConfigId> parse_model(std::string_view text) {
    if (text == "mc_full") return ModelConfigId::McFullPixel;
    if (text == "mc_quarter") return ModelConfigId::McQuarterPixel;
    for (ModelConfigId id : kModelConfigs) {
        if (name(id) == text) return id;
    }
    return std::nullopt;
}

bool needs_model_file(ModelConfigId id) {
    return id == ModelConfigId::TranslationPlusLearned || id == ModelConfigId::Learned15;
}

TransformChain translation_chain(const PairGeometry& geometry) {
    const PatchGrid grid{geometry.patch_w, geometry.patch_h, Boundary::Zero};
    return TransformChain({make_operator(make_affine_generator(AffineKind::TranslateH, grid)),
                           make_operator(make_affine_generator(AffineKind::TranslateV, grid))});
}

PsnrSummary summarize(std::vector<double> values) {
    PsnrSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.median = quantile(0.5);
    s.p10 = quantile(0.1);
    s.p25 = quantile(0.25);
    s.p75 = quantile(0.75);
    s.p90 = quantile(0.9);
    s.min = values.front();
    s.max = values.back();
    return s;
}

std::string EvaluationReport::summary_header() {
    return "model,count,failures,mean,median,p10,p25,p75,p90,min,max";
}

void EvaluationReport::write_summary_csv(std::ostream& out) const {
    out << summary_header() << '\n' << std::setprecision(10);
    for (const auto& m : models) {
        const PsnrSummary& s = m.summary;
        out << name(m.model) << ',' << s.count << ',' << m.failures << ',' << s.mean << ','
            << s.median << ',' << s.p10 << ',' << s.p25 << ',' << s.p75 << ',' << s.p90 << ','
            << s.min << ',' << s.max << '\n';
    }
}

void EvaluationReport::write_pairs_csv(std::ostream& out) const {
    out << "pair";
    for (const auto& m : models) out << ',' << name(m.model);
    out << '\n' << std::setprecision(10);
    for (std::size_t t = 0; t < pair_count; ++t) {
        out << t;
        for (const auto& m : models) out << ',' << m.psnr[t];
        out << '\n';
    }
}

TransformChain load_model(const std::filesystem::path& path, Index n) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw MissingModelFile("model file not found: " + path.string());
    }
    return read_operators(path, n);
}

EvaluationReport evaluate_models(const PairsFile& pairs, const std::vector<ModelConfigId>& models,
                                 const std::map<ModelConfigId, TransformChain>& learned,
                                 const EvaluationOptions& options) {
    const PairGeometry& g = pairs.geometry;
    g.validate();
    const int radius =
        options.search_radius < 0 ? std::min(g.buffer_x(), g.buffer_y()) : options.search_radius;
    const Mask mask = g.mask();
    EnergyConfig energy = options.energy;
    energy.mask = mask;

    EvaluationReport report;
    report.pair_count = pairs.pairs.size();
    std::optional<TransformChain> translations;

    for (ModelConfigId id : models) {
        ModelEvaluation eval{id, std::vector<double>(pairs.pairs.size()), 0, {}};
        const TransformChain* chain = nullptr;
        InferencePolicy policy = options.inference;
        switch (id) {
            case ModelConfigId::ContTranslationNoSigma:
            case ModelConfigId::ContTranslationSigma:
                if (!translations) translations = translation_chain(g);
                chain = &*translations;
                policy.blur_mode = id == ModelConfigId::ContTranslationSigma ? BlurMode::Adaptive
                                                                              : BlurMode::FrozenZero;
                break;
            case ModelConfigId::TranslationPlusLearned:
            case ModelConfigId::Learned15: {
                const auto it = learned.find(id);
                if (it == learned.end()) {
                    throw MissingModelFile(std::string("no operator file given for ") +
                                           std::string(name(id)));
                }
                if (it->second.dim() != g.size()) {
                    throw DimensionMismatch("operator file does not match the patch size");
                }
                chain = &it->second;
                break;
            }
            default: break;
        }
        // Per-model restarts would otherwise reuse the caller's widths.
        if (chain && !policy.restart_half_width.empty() &&
            policy.restart_half_width.size() != chain->size()) {
            policy.restart_half_width.clear();
        }

        if (chain) {
            const BatchInference inferred = infer_batch(*chain, pairs.pairs, energy, policy);
            parallel_for(pairs.pairs.size(), [&](std::size_t t) {
                if (!inferred.results[t]) {
                    eval.psnr[t] = std::numeric_limits<double>::quiet_NaN();
                    return;
                }
                const RealVector pred =
                    apply_chain(*chain, inferred.results[t]->coeffs, pairs.pairs[t].src).y;
                eval.psnr[t] = psnr(pred, pairs.pairs[t].tgt, mask);
            });
        } else {
            parallel_for(pairs.pairs.size(), [&](std::size_t t) {
                const PatchPair& p = pairs.pairs[t];
                switch (id) {
                    case ModelConfigId::NoTransform: eval.psnr[t] = psnr(p.src, p.tgt, mask); break;
                    case ModelConfigId::McFullPixel:
                        eval.psnr[t] = mc_full_pixel(p, g, radius).psnr;
                        break;
                    default: eval.psnr[t] = mc_quarter_pixel(p, g, radius).psnr; break;
                }
            });
        }
        std::vector<double> ok;
        for (double v : eval.psnr) {
            if (std::isnan(v)) {
                ++eval.failures;
            } else {
                ok.push_back(v);
            }
        }
        eval.summary = summarize(std::move(ok));
        report.models.push_back(std::move(eval));
    }
    return report;
}

}  // namespace lgt
