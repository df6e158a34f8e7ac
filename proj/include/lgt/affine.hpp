#pragma once

#include <array>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "lgt/inference.hpp"
#include "lgt/operator.hpp"

namespace lgt {

enum class Boundary { Periodic, Zero };

/// Pixel grid of a vectorized patch. Pixel (row, col) lives at vector index
/// row * width + col; geometric coordinates are centred on the patch, with
/// x growing with col and y growing with row.
struct PatchGrid {
    int width = 11;
    int height = 11;
    Boundary boundary = Boundary::Zero;

    Index size() const noexcept { return static_cast<Index>(width) * height; }
    Index index(int row, int col) const noexcept {
        return static_cast<Index>(row) * width + col;
    }
    double x_of(int col) const noexcept { return col - 0.5 * (width - 1); }
    double y_of(int row) const noexcept { return row - 0.5 * (height - 1); }
    void validate() const;
};

enum class AffineKind { TranslateH, TranslateV, Rotate, ScaleH, ScaleV, SkewH };

/// Synthesis / chain order. T_1 is horizontal translation, so skew acts on
/// the patch first and horizontal translation last.
inline constexpr std::array<AffineKind, 6> kAffineKinds = {
    AffineKind::TranslateH, AffineKind::TranslateV, AffineKind::Rotate,
    AffineKind::ScaleH,     AffineKind::ScaleV,     AffineKind::SkewH,
};

std::string_view name(AffineKind kind);
std::optional<AffineKind> parse_affine_kind(std::string_view text);

/// Coefficients indexed in kAffineKinds order. Units: pixels, pixels,
/// radians, log-scale, log-scale, skew fraction.
using AffineParams = std::array<double, 6>;

/// Generator of the flow that carries content along the kind's velocity
/// field v: dy/ds = -v . grad(y). Discretized with central differences in
/// the skew-symmetric split form
///     A = -1/2 (V_x D_x + D_x V_x) - 1/2 (V_y D_y + D_y V_y) + 1/2 div(v) I,
/// which equals -v . grad for divergence-free fields and keeps A normal (hence
/// unitarily diagonalizable) for all six kinds.
RealMatrix make_affine_generator(AffineKind kind, const PatchGrid& grid);

/// The six generators as a chain in kAffineKinds order.
TransformChain make_affine_chain(const PatchGrid& grid);

/// Inverse-mapping warp with bilinear interpolation, composing the six
/// transforms in chain order (skew first, horizontal translation last).
/// Samples that fall outside the grid follow the grid's boundary mode.
RealVector warp_oracle(const AffineParams& params, const RealVector& image, const PatchGrid& grid);

/// Uniform draws: translations +-5 px, rotation +-pi, scalings log-scale in
/// [ln 0.5, ln 1.5], horizontal skew +-0.5.
AffineParams sample_affine_coeffs(std::mt19937_64& rng);

struct AffineRange {
    double lo;
    double hi;
};
AffineRange affine_range(AffineKind kind);

/// Exact circular shift on n samples: the generator diagonal in the DFT
/// basis with eigenvalues -i theta_k, theta_k in (-pi, pi]. Integer s moves
/// content s samples toward higher indices exactly.
LieOperator make_fourier_translation(Index n);

struct TextureSpec {
    double blur_sigma = 2.0;   // Gaussian filter width in pixels; 0 gives white noise
    double contrast = 0.15;    // per-pixel standard deviation
    double mean = 0.5;
    bool remove_mean = true;   // subtract the patch mean after cropping
};

/// Gaussian-filtered white noise cropped to the grid.
RealVector smooth_texture_patch(std::mt19937_64& rng, const PatchGrid& grid,
                                const TextureSpec& spec = {});

struct AffineRecoveryOptions {
    PatchGrid grid{11, 11, Boundary::Zero};
    TextureSpec texture{};
    bool zero_coefficients = false;
    double psnr_threshold = 25.0;
};

struct AffineRecoveryReport {
    std::vector<PatchPair> pairs;
    std::vector<Coefficients> truth;
    std::vector<Coefficients> inferred;
    std::vector<double> psnr;  // reconstruction PSNR per patch (dB)
    RecoveryStats stats;
    std::size_t skipped = 0;

    double fraction_psnr_above(double threshold) const;
};

struct AffineBatch {
    std::vector<PatchPair> pairs;
    std::vector<Coefficients> truth;  // mu in kAffineKinds order, sigma 0
};

/// For each patch draws a texture, then the six coefficients, and warps the
/// texture with warp_oracle.
AffineBatch synthetic_affine_batch(std::size_t n_patches, std::mt19937_64& rng,
                                   const AffineRecoveryOptions& options = {});

/// Draws patches and affine coefficients, synthesizes targets with
/// warp_oracle, infers with the six hand-coded operators, and reports
/// coefficient recovery and reconstruction PSNR.
AffineRecoveryReport run_affine_recovery(std::size_t n_patches, std::mt19937_64& rng,
                                         const InferencePolicy& policy,
                                         const AffineRecoveryOptions& options = {});

/// Recovery statistics and PSNR for an already-inferred batch, shared by the
/// experiment driver and the CLI.
AffineRecoveryReport summarize_affine_recovery(const TransformChain& chain,
                                               std::vector<PatchPair> pairs,
                                               std::vector<Coefficients> truth,
                                               const BatchInference& inferred,
                                               const EnergyConfig& config);

}  // namespace lgt
