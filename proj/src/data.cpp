#include "lgt/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "binary_io.hpp"

namespace lgt {

using detail::read_f64;
using detail::read_u32;
using detail::write_f64;
using detail::write_u32;

Mask centered_mask(int patch_w, int patch_h, int mask_w, int mask_h) {
    const int bx = (patch_w - mask_w) / 2;
    const int by = (patch_h - mask_h) / 2;
    Mask m = Mask::Constant(static_cast<Index>(patch_w) * patch_h, false);
    for (int r = by; r < by + mask_h; ++r) {
        for (int c = bx; c < bx + mask_w; ++c) m[static_cast<Index>(r) * patch_w + c] = true;
    }
    return m;
}

Mask PairGeometry::mask() const { return centered_mask(patch_w, patch_h, mask_w, mask_h); }

void PairGeometry::validate() const {
    if (patch_w < 1 || patch_h < 1 || mask_w < 1 || mask_h < 1) {
        throw FormatError("patch and mask dimensions must be positive");
    }
    if (mask_w > patch_w || mask_h > patch_h) throw FormatError("mask larger than patch");
    if ((patch_w - mask_w) % 2 != 0 || (patch_h - mask_h) % 2 != 0) {
        throw FormatError("mask cannot be centred: patch and mask sizes differ by an odd count");
    }
}

void write_pairs(std::ostream& out, const PairsFile& file) {
    file.geometry.validate();
    if (file.pairs.empty()) throw FormatError("a pairs file holds at least one pair");
    const Index n = file.geometry.size();
    out.write("LGP1", 4);
    write_u32(out, kPairsFileVersion);
    write_u32(out, static_cast<std::uint32_t>(file.pairs.size()));
    write_u32(out, static_cast<std::uint32_t>(file.geometry.patch_w));
    write_u32(out, static_cast<std::uint32_t>(file.geometry.patch_h));
    write_u32(out, static_cast<std::uint32_t>(file.geometry.mask_w));
    write_u32(out, static_cast<std::uint32_t>(file.geometry.mask_h));
    for (const auto& p : file.pairs) {
        if (p.src.size() != n || p.tgt.size() != n) {
            throw DimensionMismatch("pair does not match the file's patch size");
        }
        for (Index i = 0; i < n; ++i) write_f64(out, p.src[i]);
        for (Index i = 0; i < n; ++i) write_f64(out, p.tgt[i]);
    }
    if (!out) throw Error("failed writing pairs file");
}

void write_pairs(const std::filesystem::path& path, const PairsFile& file) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_pairs(out, file);
}

PairsFile read_pairs(std::istream& in) {
    detail::expect_magic(in, "LGP1");
    const std::uint32_t version = read_u32(in, "version");
    if (version != kPairsFileVersion) {
        throw FormatError("unsupported LGP1 version " + std::to_string(version));
    }
    const std::uint32_t count = read_u32(in, "pair count");
    PairsFile file;
    file.geometry.patch_w = static_cast<int>(read_u32(in, "patch width"));
    file.geometry.patch_h = static_cast<int>(read_u32(in, "patch height"));
    file.geometry.mask_w = static_cast<int>(read_u32(in, "mask width"));
    file.geometry.mask_h = static_cast<int>(read_u32(in, "mask height"));
    file.geometry.validate();
    if (count == 0) throw FormatError("pairs file holds no pairs");

    const Index n = file.geometry.size();
    file.pairs.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        PatchPair p{RealVector(n), RealVector(n), t};
        for (Index i = 0; i < n; ++i) p.src[i] = read_f64(in, "source patch");
        for (Index i = 0; i < n; ++i) p.tgt[i] = read_f64(in, "target patch");
        file.pairs.push_back(std::move(p));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after the last pair");
    }
    return file;
}

PairsFile read_pairs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open pairs file " + path.string());
    return read_pairs(in);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in, const std::filesystem::path& path) {
    std::string tok;
    for (;;) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) break;
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw BadFrame(path.string() + ": truncated PGM header");
    return tok;
}

int pgm_int(std::istream& in, const std::filesystem::path& path) {
    const std::string tok = pgm_token(in, path);
    if (!std::all_of(tok.begin(), tok.end(), [](char ch) { return ch >= '0' && ch <= '9'; }) ||
        tok.size() > 9) {
        throw BadFrame(path.string() + ": bad PGM header value '" + tok + "'");
    }
    return std::stoi(tok);
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadFrame("cannot open " + path.string());
    if (pgm_token(in, path) != "P5") throw BadFrame(path.string() + ": not a binary PGM (P5)");
    GrayImage img;
    img.width = pgm_int(in, path);
    img.height = pgm_int(in, path);
    const int maxval = pgm_int(in, path);
    if (img.width < 1 || img.height < 1) throw BadFrame(path.string() + ": empty image");
    if (maxval < 1 || maxval > 255) throw BadFrame(path.string() + ": only 8-bit PGM is supported");
    // pgm_token consumed exactly one whitespace byte after maxval.
    img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
                 static_cast<std::streamsize>(img.pixels.size()))) {
        throw BadFrame(path.string() + ": truncated pixel data");
    }
    if (maxval != 255) {
        for (auto& p : img.pixels) {
            p = static_cast<std::uint8_t>(std::lround(255.0 * std::min<int>(p, maxval) / maxval));
        }
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    if (image.pixels.size() !=
        static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height)) {
        throw DimensionMismatch("image buffer does not match its dimensions");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw Error("failed writing " + path.string());
}

ExtractResult extract_pairs(const std::filesystem::path& frame_dir, const ExtractOptions& options,
                            std::mt19937_64& rng) {
    const PairGeometry& g = options.geometry;
    g.validate();
    if (options.stride < 1) throw Error("stride must be >= 1");
    if (options.count < 1) throw Error("count must be >= 1");

    std::error_code ec;
    if (!std::filesystem::is_directory(frame_dir, ec)) {
        throw EmptyDir(frame_dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(frame_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());

    ExtractResult result;
    result.file.geometry = g;
    std::vector<std::optional<GrayImage>> frames;
    for (const auto& p : paths) {
        try {
            frames.push_back(read_pgm(p));
        } catch (const BadFrame& e) {
            result.warnings.push_back(e.what());
            frames.push_back(std::nullopt);
        }
    }
    // Frames whose size disagrees with the first readable frame are dropped.
    const GrayImage* reference = nullptr;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!frames[i]) continue;
        if (!reference) {
            reference = &*frames[i];
        } else if (frames[i]->width != reference->width || frames[i]->height != reference->height) {
            result.warnings.push_back(paths[i].string() + ": dimensions differ from " +
                                      "the first frame, skipped");
            frames[i].reset();
        }
    }

    std::vector<std::size_t> starts;  // index of the earlier frame of each usable pair
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        if (frames[i] && frames[i + 1]) starts.push_back(i);
    }
    if (starts.empty()) throw EmptyDir(frame_dir.string() + " has no consecutive readable frames");
    if (reference->width < g.patch_w || reference->height < g.patch_h) {
        throw BadFrame("frames are smaller than the requested patch");
    }

    const int corners_x = (reference->width - g.patch_w) / options.stride + 1;
    const int corners_y = (reference->height - g.patch_h) / options.stride + 1;
    std::uniform_int_distribution<std::size_t> pick_pair(0, starts.size() - 1);
    std::uniform_int_distribution<int> pick_x(0, corners_x - 1);
    std::uniform_int_distribution<int> pick_y(0, corners_y - 1);

    auto crop = [&](const GrayImage& img, int x0, int y0) {
        RealVector v(g.size());
        for (int r = 0; r < g.patch_h; ++r) {
            for (int c = 0; c < g.patch_w; ++c) {
                const std::size_t at = static_cast<std::size_t>(y0 + r) * img.width + (x0 + c);
                v[static_cast<Index>(r) * g.patch_w + c] = img.pixels[at] / 255.0;
            }
        }
        return v;
    };
    for (std::size_t t = 0; t < options.count; ++t) {
        const std::size_t f = starts[pick_pair(rng)];
        const int x0 = pick_x(rng) * options.stride;
        const int y0 = pick_y(rng) * options.stride;
        result.file.pairs.push_back({crop(*frames[f], x0, y0), crop(*frames[f + 1], x0, y0), t});
    }
    return result;
}

PairsFile synthetic_translation_batch(std::mt19937_64& rng, std::size_t count,
                                      const TranslationBatchSpec& spec,
                                      std::vector<TranslationTruth>* truth) {
    const PairGeometry& g = spec.geometry;
    g.validate();
    if (count < 1) throw Error("count must be >= 1");
    const BandLimitedSpec& tex = spec.texture;
    if (tex.components < 1) throw Error("texture needs at least one component");

    std::uniform_real_distribution<double> freq(-tex.max_frequency, tex.max_frequency);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> shift(-spec.max_shift, spec.max_shift);
    std::uniform_real_distribution<double> log_gain(-spec.max_log_gain, spec.max_log_gain);
    const double amplitude = tex.contrast / std::sqrt(static_cast<double>(tex.components));

    PairsFile file;
    file.geometry = g;
    std::vector<double> kx(static_cast<std::size_t>(tex.components));
    std::vector<double> ky(kx.size()), ph(kx.size());
    for (std::size_t t = 0; t < count; ++t) {
        for (std::size_t i = 0; i < kx.size(); ++i) {
            kx[i] = freq(rng);
            ky[i] = freq(rng);
            ph[i] = phase(rng);
        }
        // Draw every variate even when overridden so streams stay aligned.
        double dx = shift(rng);
        double dy = shift(rng);
        const double gain = spec.max_log_gain > 0.0 ? std::exp(log_gain(rng)) : 1.0;
        if (spec.fixed_dx) dx = *spec.fixed_dx;
        if (spec.horizontal_only) dy = 0.0;
        if (truth) truth->push_back({dx, dy, gain});
        auto field = [&](double x, double y) {
            double v = 0.0;
            for (std::size_t i = 0; i < kx.size(); ++i) v += std::cos(kx[i] * x + ky[i] * y + ph[i]);
            return tex.mean + amplitude * v;
        };
        PatchPair p{RealVector(g.size()), RealVector(g.size()), t};
        for (int r = 0; r < g.patch_h; ++r) {
            for (int c = 0; c < g.patch_w; ++c) {
                const Index at = static_cast<Index>(r) * g.patch_w + c;
                p.src[at] = field(c, r);
                p.tgt[at] = gain * field(c - dx, r - dy);
            }
        }
        file.pairs.push_back(std::move(p));
    }
    return file;
}

}  // namespace lgt
