#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lgt/data.hpp"
#include "lgt/inference.hpp"

namespace lgt {

/// Result of a block-matching search. The prediction is
/// x_pred(p) = x_src(p - offset), i.e. content moved by +offset.
struct MotionMatch {
    double dx = 0.0;
    double dy = 0.0;
    double mse = 0.0;
    double psnr = 0.0;
};

/// Exhaustive integer search over |dx|, |dy| <= search_radius, scored on the
/// geometry's mask. Ties go to the smallest |offset|, then row-major order
/// (dy, then dx, ascending). search_radius must not exceed the buffer.
MotionMatch mc_full_pixel(const PatchPair& pair, const PairGeometry& geometry, int search_radius);

/// Same search on the quarter-pixel lattice with bilinear interpolation of
/// x_src. Integer offsets are part of the lattice, so the result is never
/// worse than mc_full_pixel.
MotionMatch mc_quarter_pixel(const PatchPair& pair, const PairGeometry& geometry,
                             int search_radius);

enum class ModelConfigId {
    NoTransform,
    McFullPixel,
    McQuarterPixel,
    ContTranslationNoSigma,
    ContTranslationSigma,
    TranslationPlusLearned,
    Learned15,
};

inline constexpr std::array<ModelConfigId, 7> kModelConfigs = {
    ModelConfigId::NoTransform,           ModelConfigId::McFullPixel,
    ModelConfigId::McQuarterPixel,        ModelConfigId::ContTranslationNoSigma,
    ModelConfigId::ContTranslationSigma,  ModelConfigId::TranslationPlusLearned,
    ModelConfigId::Learned15,
};

std::string_view name(ModelConfigId id);
/// Accepts the canonical names plus the short forms mc_full / mc_quarter.
std::optional<ModelConfigId> parse_model(std::string_view text);
bool needs_model_file(ModelConfigId id);

/// Whole-patch horizontal and vertical translation generators for a patch
/// geometry (zero boundary), in that order.
TransformChain translation_chain(const PairGeometry& geometry);

struct EvaluationOptions {
    int search_radius = -1;  // -1: the buffer width
    EnergyConfig energy;     // weights only; the mask always comes from the geometry
    InferencePolicy inference{};
};

struct PsnrSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p10 = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantiles of a sample.
PsnrSummary summarize(std::vector<double> values);

struct ModelEvaluation {
    ModelConfigId model;
    std::vector<double> psnr;  // per pair, NaN where inference failed
    std::size_t failures = 0;
    PsnrSummary summary;       // over the successful pairs
};

struct EvaluationReport {
    std::vector<ModelEvaluation> models;
    std::size_t pair_count = 0;

    static std::string summary_header();
    void write_summary_csv(std::ostream& out) const;
    /// pair,<model>,<model>,... one row per pair.
    void write_pairs_csv(std::ostream& out) const;
};

/// Reads an LGT1 model file for the given patch size; a missing path raises
/// MissingModelFile.
TransformChain load_model(const std::filesystem::path& path, Index n);

/// Scores every requested model on every pair over the geometry's mask.
/// Learned models take their chains from `learned`; a requested model
/// without an entry raises MissingModelFile.
EvaluationReport evaluate_models(const PairsFile& pairs, const std::vector<ModelConfigId>& models,
                                 const std::map<ModelConfigId, TransformChain>& learned,
                                 const EvaluationOptions& options = {});

}  // namespace lgt
