#include "lgt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace lgt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("invalid value '" + text + "' for " + key);
    }
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    const double v = parse_number<double>(key, text);
    if (!std::isfinite(v)) throw ConfigError("non-finite value for " + key);
    return v;
}

// Shortest text that reads back to the same double.
std::string real_text(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define LGT_REAL(member)                                                                        \
    Field {                                                                                     \
        [](RunConfig& c, const std::string& k, const std::string& v) {                          \
            c.member = parse_real(k, v);                                                        \
        },                                                                                      \
            [](const RunConfig& c) { return real_text(c.member); }                              \
    }
#define LGT_INT(member, type)                                                                   \
    Field {                                                                                     \
        [](RunConfig& c, const std::string& k, const std::string& v) {                          \
            c.member = parse_number<type>(k, v);                                                \
        },                                                                                      \
            [](const RunConfig& c) { return std::to_string(c.member); }                         \
    }

const std::vector<std::pair<std::string, Field>>& schema() {
    static const std::vector<std::pair<std::string, Field>> fields = {
        {"run.seed", LGT_INT(seed, std::uint64_t)},
        {"run.threads", LGT_INT(threads, std::size_t)},
        {"energy.eta_n", LGT_REAL(eta_n)},
        {"energy.eta_d", LGT_REAL(eta_d)},
        {"energy.eta_sigma", LGT_REAL(eta_sigma)},
        {"energy.convention",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "later") {
                  c.convention = IntermediateConvention::LaterIndicesActed;
              } else if (v == "earlier") {
                  c.convention = IntermediateConvention::EarlierIndicesActed;
              } else {
                  throw ConfigError(k + " must be 'later' or 'earlier'");
              }
          },
          [](const RunConfig& c) {
              return std::string(c.convention == IntermediateConvention::LaterIndicesActed
                                     ? "later"
                                     : "earlier");
          }}},
        {"inference.blur",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "adaptive") {
                  c.blur = BlurMode::Adaptive;
              } else if (v == "frozen_zero") {
                  c.blur = BlurMode::FrozenZero;
              } else {
                  throw ConfigError(k + " must be 'adaptive' or 'frozen_zero'");
              }
          },
          [](const RunConfig& c) {
              return std::string(c.blur == BlurMode::Adaptive ? "adaptive" : "frozen_zero");
          }}},
        {"inference.restarts", LGT_INT(restarts, std::size_t)},
        {"inference.max_iters", LGT_INT(inference_minimize.max_iters, int)},
        {"inference.grad_tol", LGT_REAL(inference_minimize.grad_tol)},
        {"inference.memory", LGT_INT(inference_minimize.memory, int)},
        {"inference.c1", LGT_REAL(inference_minimize.c1)},
        {"inference.backtrack", LGT_REAL(inference_minimize.backtrack)},
        {"train.n_ops", LGT_INT(n_ops, std::size_t)},
        {"train.fixed_ops",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              c.fixed_ops.clear();
              std::stringstream s(v);
              std::string item;
              while (std::getline(s, item, ',')) {
                  item = trim(item);
                  if (!item.empty()) c.fixed_ops.push_back(parse_number<std::size_t>(k, item));
              }
          },
          [](const RunConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.fixed_ops.size(); ++i) {
                  out += (i ? "," : "") + std::to_string(c.fixed_ops[i]);
              }
              return out;
          }}},
        {"train.batch_size", LGT_INT(batch_size, std::size_t)},
        {"train.epochs", LGT_INT(epochs, int)},
        {"train.init_scale", LGT_REAL(init_scale)},
        {"train.m_step_max_iters", LGT_INT(m_step.max_iters, int)},
        {"train.m_step_grad_tol", LGT_REAL(m_step.grad_tol)},
        {"train.m_step_memory", LGT_INT(m_step.memory, int)},
        {"eval.search_radius", LGT_INT(search_radius, int)},
    };
    return fields;
}

#undef LGT_REAL
#undef LGT_INT

}  // namespace

void RunConfig::set(const std::string& qualified_key, const std::string& value) {
    for (const auto& [key, field] : schema()) {
        if (key == qualified_key) {
            field.set(*this, key, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + qualified_key + "'");
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [key, field] : schema()) out.push_back(key);
    return out;
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    std::string section;
    for (const auto& [key, field] : schema()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out << '\n';
            out << '[' << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << field.get(*this) << '\n';
    }
    return out.str();
}

EnergyConfig RunConfig::energy(Index n) const {
    EnergyConfig c = EnergyConfig::defaults(n);
    c.eta_n = eta_n;
    c.eta_d = eta_d;
    c.eta_sigma = eta_sigma;
    c.convention = convention;
    return c;
}

InferencePolicy RunConfig::inference() const {
    InferencePolicy p;
    p.blur_mode = blur;
    p.restarts = restarts;
    p.seed = seed;
    p.minimize = inference_minimize;
    return p;
}

TrainSpec RunConfig::train() const {
    TrainSpec t;
    t.n_ops = n_ops;
    t.fixed_ops = fixed_ops;
    t.batch_size = batch_size;
    t.epochs = epochs;
    t.seed = seed;
    t.init_scale = init_scale;
    t.m_step = m_step;
    t.inference = inference();
    return t;
}

RunConfig parse_run_config(std::istream& in, RunConfig base) {
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                              "' outside a section");
        }
        base.set(section + "." + key, value);
    }
    return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_run_config(in, base);
}

}  // namespace lgt
