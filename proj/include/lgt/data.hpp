#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lgt/energy.hpp"

namespace lgt {

/// Patch and scored-region sizes. The mask is the centred mask_w x mask_h
/// window; the rest of the patch is buffer that content may flow through.
struct PairGeometry {
    int patch_w = 17;
    int patch_h = 17;
    int mask_w = 9;
    int mask_h = 9;

    Index size() const noexcept { return static_cast<Index>(patch_w) * patch_h; }
    int buffer_x() const noexcept { return (patch_w - mask_w) / 2; }
    int buffer_y() const noexcept { return (patch_h - mask_h) / 2; }
    Mask mask() const;
    /// Throws FormatError unless 1 <= mask <= patch with an even margin.
    void validate() const;
};

/// Row-major boolean mask selecting the centred mask_w x mask_h window.
Mask centered_mask(int patch_w, int patch_h, int mask_w, int mask_h);

// LGP1 pairs files (little-endian):
//   "LGP1" | u32 version=1 | u32 count | u32 patch_w | u32 patch_h |
//   u32 mask_w | u32 mask_h | count x (src, tgt) float64 row-major patches
inline constexpr std::uint32_t kPairsFileVersion = 1;

struct PairsFile {
    PairGeometry geometry;
    std::vector<PatchPair> pairs;  // ids are the file positions
};

void write_pairs(std::ostream& out, const PairsFile& file);
void write_pairs(const std::filesystem::path& path, const PairsFile& file);
PairsFile read_pairs(std::istream& in);
PairsFile read_pairs(const std::filesystem::path& path);

/// 8-bit grayscale image; pixels row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Binary PGM (P5, maxval <= 255). Comment lines in the header are skipped.
/// Throws BadFrame on anything else.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

struct ExtractOptions {
    PairGeometry geometry;
    int stride = 1;          // patch corners lie on this lattice
    std::size_t count = 1000;
};

struct ExtractResult {
    PairsFile file;
    std::vector<std::string> warnings;  // skipped frames
};

/// Crops co-located patches from consecutive frames of a directory of .pgm
/// files taken in lexicographic order. Each pair picks a frame pair and a
/// corner uniformly at random. Pixels are scaled to [0, 1]. Unreadable or
/// mismatched frames are skipped with a warning; EmptyDir is raised when
/// no usable consecutive pair remains.
ExtractResult extract_pairs(const std::filesystem::path& frame_dir, const ExtractOptions& options,
                            std::mt19937_64& rng);

/// Smooth synthetic texture: a sum of random plane waves with wave-vector
/// components uniform in +-max_frequency (radians per pixel), evaluated at
/// any real position so exact sub-pixel translations are available.
struct BandLimitedSpec {
    int components = 40;
    double max_frequency = 1.2;
    double contrast = 0.12;  // amplitude of each wave times sqrt(components)
    double mean = 0.5;
};

struct TranslationBatchSpec {
    PairGeometry geometry;
    double max_shift = 2.0;       // per-axis shift drawn uniformly in +-max_shift
    double max_log_gain = 0.0;    // brightness gain e^b with b uniform in +-max_log_gain
    bool horizontal_only = false; // vertical shift fixed at 0
    std::optional<double> fixed_dx;  // overrides the random horizontal shift
    BandLimitedSpec texture;
};

/// Ground truth of one synthetic translation pair.
struct TranslationTruth {
    double dx = 0.0;
    double dy = 0.0;
    double gain = 1.0;
};

/// Pairs whose target is the source texture translated by a random
/// sub-pixel offset (content moves toward +x / +y for positive shifts)
/// and multiplied by a random brightness gain.
PairsFile synthetic_translation_batch(std::mt19937_64& rng, std::size_t count,
                                      const TranslationBatchSpec& spec,
                                      std::vector<TranslationTruth>* truth = nullptr);

}  // namespace lgt
