#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lgt/energy.hpp"
#include "lgt/inference.hpp"
#include "lgt/learning.hpp"

namespace lgt {

/// Raised for unknown keys, malformed lines and out-of-range values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Settings shared by the command-line tools. The text form is
///
///   # comment
///   [section]
///   key = value
///
/// with the sections and keys listed by RunConfig::keys(). Unknown keys are
/// rejected. Later assignments override earlier ones.
struct RunConfig {
    // [run]
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0: all available cores
    // [energy]
    double eta_n = 1.0;
    double eta_d = 0.005;
    double eta_sigma = 0.01;
    IntermediateConvention convention = IntermediateConvention::LaterIndicesActed;
    // [inference]
    BlurMode blur = BlurMode::Adaptive;
    std::size_t restarts = 0;
    MinimizeSpec inference_minimize = MinimizeSpec::inference();
    // [train]
    std::size_t n_ops = 1;
    std::vector<std::size_t> fixed_ops;
    std::size_t batch_size = 200;
    int epochs = 50;
    double init_scale = 0.01;
    MinimizeSpec m_step = MinimizeSpec::m_step();
    // [eval]
    int search_radius = -1;  // -1: the buffer width

    /// Sets "section.key" from its text value.
    void set(const std::string& qualified_key, const std::string& value);
    /// Every accepted "section.key", in output order.
    static std::vector<std::string> keys();
    /// Resolved settings in the text form accepted by parse_run_config.
    std::string to_text() const;

    EnergyConfig energy(Index n) const;
    InferencePolicy inference() const;
    TrainSpec train() const;
};

/// Applies the assignments in `in` on top of `base`.
RunConfig parse_run_config(std::istream& in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace lgt
