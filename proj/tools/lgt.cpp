// lgt: command-line front end for synthesis, inference, training,
// evaluation and gradient checking.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgt/affine.hpp"
#include "lgt/config.hpp"
#include "lgt/data.hpp"
#include "lgt/evaluate.hpp"
#include "lgt/gradcheck.hpp"
#include "lgt/learning.hpp"
#include "lgt/metrics.hpp"
#include "lgt/operator_io.hpp"
#include "lgt/parallel.hpp"

namespace fs = std::filesystem;
using namespace lgt;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

const CLI::Validator kAtLeastOne(
    [](std::string& text) {
        const bool digits = !text.empty() && text.size() < 19 &&
                            text.find_first_not_of("0123456789") == std::string::npos;
        return digits && std::stoull(text) >= 1 ? std::string()
                                                 : "must be an integer >= 1, got '" + text + "'";
    },
    "INT>=1");

/// Bad flag combinations detected after parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string command_line;
};

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    set_thread_count(cfg.threads);
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

/// config.txt: the invocation, the command's own settings and the resolved
/// run configuration.
void write_config(const fs::path& out_dir, const Globals& g,
                  const std::vector<std::pair<std::string, std::string>>& command_settings,
                  const RunConfig& cfg) {
    fs::create_directories(out_dir);
    std::ofstream out = open_output(out_dir / "config.txt");
    out << "# " << g.command_line << "\n\n[command]\n";
    for (const auto& [k, v] : command_settings) out << k << " = " << v << '\n';
    out << '\n' << cfg.to_text();
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(1, sep) : "") + items[i];
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
std::string str(const T& v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string kind = "affine6";
    std::size_t count = 100;
    double shift = 3.0;
    double max_shift = 2.0;
    double max_log_gain = 0.2;
    std::optional<int> patch;
    std::optional<int> mask;
    std::string frames;
    int stride = 1;
    std::string out_dir;
};

PairGeometry synth_geometry(const SynthArgs& a, int default_patch, int default_mask) {
    PairGeometry g;
    g.patch_w = g.patch_h = a.patch.value_or(default_patch);
    g.mask_w = g.mask_h = a.mask.value_or(std::min(default_mask, g.patch_w));
    g.validate();
    return g;
}

int cmd_synth(const SynthArgs& a, const Globals& glob) {
    const RunConfig cfg = resolve_config(glob);
    std::mt19937_64 rng(cfg.seed);
    const fs::path out_dir(a.out_dir);

    std::vector<std::pair<std::string, std::string>> settings = {
        {"kind", a.kind}, {"count", str(a.count)}};
    PairsFile file;
    std::ostringstream truth;
    truth << std::setprecision(17);

    if (a.kind == "affine6") {
        AffineRecoveryOptions options;
        file.geometry = synth_geometry(a, 11, 11);
        options.grid = {file.geometry.patch_w, file.geometry.patch_h, Boundary::Zero};
        AffineBatch batch = synthetic_affine_batch(a.count, rng, options);
        truth << "pair";
        for (AffineKind k : kAffineKinds) truth << ',' << name(k);
        truth << '\n';
        for (std::size_t t = 0; t < batch.truth.size(); ++t) {
            truth << t;
            for (Index k = 0; k < batch.truth[t].mu.size(); ++k) truth << ',' << batch.truth[t].mu[k];
            truth << '\n';
        }
        file.pairs = std::move(batch.pairs);
    } else if (a.kind == "translate1d" || a.kind == "translation" || a.kind == "mixed") {
        TranslationBatchSpec spec;
        spec.geometry = synth_geometry(a, 17, 9);
        if (a.kind == "translate1d") {
            spec.horizontal_only = true;
            spec.fixed_dx = a.shift;
            settings.emplace_back("shift", str(a.shift));
        } else {
            spec.max_shift = a.max_shift;
            settings.emplace_back("max_shift", str(a.max_shift));
        }
        if (a.kind == "mixed") {
            spec.max_log_gain = a.max_log_gain;
            settings.emplace_back("max_log_gain", str(a.max_log_gain));
        }
        std::vector<TranslationTruth> tt;
        file = synthetic_translation_batch(rng, a.count, spec, &tt);
        truth << "pair,dx,dy,gain\n";
        for (std::size_t t = 0; t < tt.size(); ++t) {
            truth << t << ',' << tt[t].dx << ',' << tt[t].dy << ',' << tt[t].gain << '\n';
        }
    } else if (a.kind == "frames") {
        if (a.frames.empty()) throw UsageError("--kind frames requires --frames DIR");
        ExtractOptions options;
        options.geometry = synth_geometry(a, 17, 9);
        options.stride = a.stride;
        options.count = a.count;
        settings.emplace_back("frames", a.frames);
        settings.emplace_back("stride", str(a.stride));
        ExtractResult result = extract_pairs(a.frames, options, rng);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
        file = std::move(result.file);
    } else {
        throw UsageError("unknown --kind '" + a.kind + "'");
    }

    settings.emplace_back("patch", str(file.geometry.patch_w));
    settings.emplace_back("mask", str(file.geometry.mask_w));
    write_config(out_dir, glob, settings, cfg);
    write_pairs(out_dir / "pairs.lgp", file);
    if (a.kind != "frames") open_output(out_dir / "truth.csv") << truth.str();
    std::cout << "wrote " << file.pairs.size() << " pairs (" << file.geometry.patch_w << 'x'
              << file.geometry.patch_h << ", mask " << file.geometry.mask_w << 'x'
              << file.geometry.mask_h << ") to " << (out_dir / "pairs.lgp").string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// infer

struct InferArgs {
    std::string pairs;
    std::string operators;
    bool affine = false;
    bool translations = false;
    bool no_blur = false;
    std::optional<std::size_t> restarts;
    std::string truth;
    std::string out_dir;
};

/// Reads the first k value columns of a truth CSV (header, then pair,v1,...).
std::vector<Coefficients> read_truth(const fs::path& path, std::size_t k, std::size_t rows) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open truth file " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<Coefficients> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() < k + 1) throw FormatError("truth row has fewer than " + str(k) + " values");
        Coefficients c = Coefficients::zeros(k);
        for (std::size_t j = 0; j < k; ++j) {
            try {
                c.mu[static_cast<Index>(j)] = std::stod(cells[j + 1]);
            } catch (const std::exception&) {
                throw FormatError("bad number '" + cells[j + 1] + "' in truth file");
            }
        }
        out.push_back(std::move(c));
    }
    if (out.size() != rows) throw FormatError("truth file row count does not match the pairs");
    return out;
}

int cmd_infer(const InferArgs& a, const Globals& glob) {
    if ((!a.operators.empty()) + a.affine + a.translations != 1) {
        throw UsageError("give exactly one of --operators, --affine, --translations");
    }
    RunConfig cfg = resolve_config(glob);
    if (a.no_blur) cfg.blur = BlurMode::FrozenZero;
    if (a.restarts) cfg.restarts = *a.restarts;

    const PairsFile file = read_pairs(a.pairs);
    const PairGeometry& g = file.geometry;
    const Index n = g.size();
    TransformChain chain;
    std::vector<bool> periodic;
    std::string model;
    if (a.affine) {
        chain = make_affine_chain({g.patch_w, g.patch_h, Boundary::Zero});
        periodic.assign(chain.size(), false);
        periodic[2] = true;  // rotation angle
        model = "affine";
    } else if (a.translations) {
        chain = translation_chain(g);
        model = "translations";
    } else {
        chain = load_model(a.operators, n);
        model = a.operators;
    }
    const std::size_t k = chain.size();

    EnergyConfig energy = cfg.energy(n);
    energy.mask = g.mask();
    const BatchInference inferred = infer_batch(chain, file.pairs, energy, cfg.inference());

    const fs::path out_dir(a.out_dir);
    write_config(out_dir, glob,
                 {{"pairs", a.pairs}, {"model", model}, {"truth", a.truth}}, cfg);

    std::ofstream csv = open_output(out_dir / "coefficients.csv");
    csv << "pair";
    for (std::size_t j = 0; j < k; ++j) csv << ",mu_" << j;
    for (std::size_t j = 0; j < k; ++j) csv << ",sigma_" << j;
    csv << ",energy,psnr,converged\n" << std::setprecision(12);
    std::size_t ok = 0;
    double psnr_sum = 0.0;
    for (std::size_t t = 0; t < file.pairs.size(); ++t) {
        csv << t;
        const auto& r = inferred.results[t];
        if (!r) {
            for (std::size_t j = 0; j < 2 * k + 2; ++j) csv << ",nan";
            csv << ",0\n";
            continue;
        }
        const double p =
            psnr(apply_chain(chain, r->coeffs, file.pairs[t].src).y, file.pairs[t].tgt, energy.mask);
        for (Index j = 0; j < r->coeffs.mu.size(); ++j) csv << ',' << r->coeffs.mu[j];
        for (Index j = 0; j < r->coeffs.sigma.size(); ++j) csv << ',' << r->coeffs.sigma[j];
        csv << ',' << r->energy << ',' << p << ',' << (r->converged ? 1 : 0) << '\n';
        ++ok;
        psnr_sum += p;
    }
    for (std::size_t t = 0; t < inferred.errors.size(); ++t) {
        if (!inferred.errors[t].empty()) std::cerr << "skipped: " << inferred.errors[t] << '\n';
    }

    std::cout << "pairs " << file.pairs.size() << ", inferred " << ok << ", skipped "
              << file.pairs.size() - ok << '\n';
    if (ok == 0) throw AllRestartsFailed("inference failed on every pair");
    std::cout << std::setprecision(6) << "mean psnr " << psnr_sum / static_cast<double>(ok)
              << " dB\n";

    if (!a.truth.empty()) {
        std::vector<Coefficients> truth = read_truth(a.truth, k, file.pairs.size());
        RecoveryStats stats;
        std::optional<double> frac25;
        if (a.affine) {
            const AffineRecoveryReport rep =
                summarize_affine_recovery(chain, file.pairs, std::move(truth), inferred, energy);
            stats = rep.stats;
            frac25 = rep.fraction_psnr_above(25.0);
        } else {
            std::vector<Coefficients> t_ok, i_ok;
            for (std::size_t t = 0; t < file.pairs.size(); ++t) {
                if (!inferred.results[t]) continue;
                t_ok.push_back(truth[t]);
                i_ok.push_back(inferred.results[t]->coeffs);
            }
            stats = coefficient_recovery_stats(t_ok, i_ok, periodic);
        }
        std::cout << "recovery aggregate " << stats.aggregate << " over " << stats.samples
                  << " samples\nrecovery per operator";
        for (double f : stats.per_operator) std::cout << ' ' << f;
        std::cout << '\n';
        if (frac25) std::cout << "fraction psnr > 25 dB " << *frac25 << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string pairs;
    std::optional<std::size_t> ops;
    bool fix_translations = false;
    std::optional<int> epochs;
    std::optional<std::size_t> batch;
    std::string resume;
    std::string out_dir;
};

/// Epoch recorded in a checkpoint name: epoch_NNNN.lgt was saved after
/// epoch NNNN, initial.lgt before epoch 0.
int first_epoch_after(const fs::path& checkpoint) {
    const std::string stem = checkpoint.filename().string();
    if (stem == "initial.lgt") return 0;
    static const std::regex pattern(R"(epoch_(\d+)\.lgt)");
    std::smatch m;
    if (!std::regex_match(stem, m, pattern)) {
        throw UsageError("--resume expects initial.lgt or epoch_NNNN.lgt");
    }
    return std::stoi(m[1].str()) + 1;
}

std::string checkpoint_name(int epoch) {
    std::ostringstream s;
    s << "epoch_" << std::setw(4) << std::setfill('0') << epoch << ".lgt";
    return s.str();
}

int cmd_train(const TrainArgs& a, const Globals& glob) {
    RunConfig cfg = resolve_config(glob);
    if (a.ops) cfg.n_ops = *a.ops;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.batch) cfg.batch_size = *a.batch;
    std::vector<std::optional<LieOperator>> preset;
    const PairsFile pool = read_pairs(a.pairs);
    const PairGeometry& g = pool.geometry;
    const Index n = g.size();
    if (a.fix_translations) {
        if (cfg.n_ops < 2) throw UsageError("--fix-translations needs at least 2 operators");
        cfg.fixed_ops = {0, 1};
        const TransformChain tr = translation_chain(g);
        preset.assign(cfg.n_ops, std::nullopt);
        preset[0] = tr[0];
        preset[1] = tr[1];
    }
    const TrainSpec spec = cfg.train();
    spec.validate();

    EnergyConfig energy = cfg.energy(n);
    energy.mask = g.mask();
    const fs::path out_dir(a.out_dir);
    write_config(out_dir, glob,
                 {{"pairs", a.pairs},
                  {"fix_translations", a.fix_translations ? "true" : "false"},
                  {"resume", a.resume}},
                 cfg);

    TransformChain chain;
    int first_epoch = 0;
    if (!a.resume.empty()) {
        first_epoch = first_epoch_after(a.resume);
        chain = load_model(a.resume, n);
        if (chain.size() != spec.n_ops) {
            throw DimensionMismatch("checkpoint holds " + str(chain.size()) + " operators, expected " +
                                    str(spec.n_ops));
        }
    } else {
        chain = initial_chain(n, spec, preset);
        write_operators(out_dir / "initial.lgt", chain);
    }

    // Batches are drawn without replacement from the pool with a per-epoch
    // stream, so a resumed run sees the same data as an uninterrupted one.
    const std::uint64_t data_seed = mix_seed(spec.seed, 0xda7a);
    BatchProvider provider = [&](int epoch, std::size_t count) {
        std::mt19937_64 rng(mix_seed(data_seed, static_cast<std::uint64_t>(epoch)));
        std::vector<PatchPair> batch;
        std::sample(pool.pairs.begin(), pool.pairs.end(), std::back_inserter(batch),
                    std::min(count, pool.pairs.size()), rng);
        return batch;
    };
    if (pool.pairs.size() < spec.batch_size) {
        std::cerr << "warning: pool of " << pool.pairs.size() << " pairs is smaller than the batch size "
                  << spec.batch_size << "; every epoch uses the whole pool\n";
    }

    const fs::path log_path = out_dir / "train_log.csv";
    const bool append = first_epoch > 0 && fs::exists(log_path);
    std::ofstream log(log_path, append ? std::ios::app : std::ios::trunc);
    if (!log) throw FormatError("cannot write " + log_path.string());
    if (!append) log << EpochLog::csv_header() << '\n';
    std::cout << EpochLog::csv_header() << '\n';

    auto on_epoch = [&](const EpochLog& entry, const TransformChain& c) {
        write_operators(out_dir / checkpoint_name(entry.epoch), c);
        log << entry.csv_line() << '\n' << std::flush;
        std::cout << entry.csv_line() << '\n' << std::flush;
    };
    train(provider, energy, spec, std::move(chain), first_epoch, on_epoch);
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string pairs;
    std::string models;
    std::string tpl_model;
    std::string learned15_model;
    std::optional<int> search_radius;
    std::string out_dir;
};

int cmd_eval(const EvalArgs& a, const Globals& glob) {
    RunConfig cfg = resolve_config(glob);
    if (a.search_radius) cfg.search_radius = *a.search_radius;

    std::vector<ModelConfigId> models;
    if (a.models.empty()) {
        for (ModelConfigId id : kModelConfigs) {
            if (id == ModelConfigId::TranslationPlusLearned && a.tpl_model.empty()) continue;
            if (id == ModelConfigId::Learned15 && a.learned15_model.empty()) continue;
            models.push_back(id);
        }
    } else {
        for (const auto& item : split(a.models, ',')) {
            const auto id = parse_model(item);
            if (!id) throw UsageError("unknown model '" + item + "'");
            if (std::find(models.begin(), models.end(), *id) == models.end()) models.push_back(*id);
        }
    }

    const PairsFile file = read_pairs(a.pairs);
    const Index n = file.geometry.size();
    std::map<ModelConfigId, TransformChain> learned;
    for (ModelConfigId id : models) {
        if (!needs_model_file(id)) continue;
        const std::string& path =
            id == ModelConfigId::TranslationPlusLearned ? a.tpl_model : a.learned15_model;
        if (path.empty()) {
            throw MissingModelFile(std::string(name(id)) + " requires an operator file");
        }
        learned.emplace(id, load_model(path, n));
    }

    EvaluationOptions options;
    options.search_radius = cfg.search_radius;
    options.energy = cfg.energy(n);
    options.inference = cfg.inference();
    const EvaluationReport report = evaluate_models(file, models, learned, options);

    std::vector<std::string> names;
    for (ModelConfigId id : models) names.emplace_back(name(id));
    const fs::path out_dir(a.out_dir);
    write_config(out_dir, glob,
                 {{"pairs", a.pairs},
                  {"models", join(names, ',')},
                  {"tpl_model", a.tpl_model},
                  {"learned15_model", a.learned15_model}},
                 cfg);
    {
        std::ofstream out = open_output(out_dir / "summary.csv");
        report.write_summary_csv(out);
    }
    {
        std::ofstream out = open_output(out_dir / "pairs.csv");
        report.write_pairs_csv(out);
    }
    report.write_summary_csv(std::cout);
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

constexpr double kGradTolerance = 1e-5;

int cmd_gradcheck(std::size_t instances, const std::string& out_dir, const Globals& glob) {
    const RunConfig cfg = resolve_config(glob);
    const GradCheckSuiteResult r = run_gradcheck_suite(instances, cfg.seed);
    if (!out_dir.empty()) write_config(out_dir, glob, {{"instances", str(instances)}}, cfg);
    std::cout << std::setprecision(3) << std::scientific
              << "instances " << r.instances << '\n'
              << "coefficient gradients: max relative error " << r.coefficients.max_rel_error
              << " (" << r.coefficients.compared << " compared, " << r.coefficients.skipped
              << " below floor)\n"
              << "operator gradients:    max relative error " << r.operators.max_rel_error << " ("
              << r.operators.compared << " compared, " << r.operators.skipped << " below floor)\n";
    const bool pass = r.max_rel_error() < kGradTolerance;
    std::cout << (pass ? "PASS" : "FAIL") << " max relative error " << r.max_rel_error()
              << " (tolerance " << kGradTolerance << ")\n";
    return pass ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Learns Lie-group transformation operators from image-patch pairs and infers\n"
        "per-pair transformation coefficients.\n\n"
        "Outputs (all CSV with a header row, columns in the order listed):\n"
        "  synth: pairs.lgp, truth.csv = pair,<six affine coefficients> | pair,dx,dy,gain\n"
        "  infer: coefficients.csv = pair,mu_0..mu_{K-1},sigma_0..sigma_{K-1},energy,psnr,converged\n"
        "  train: initial.lgt, epoch_NNNN.lgt,\n"
        "         train_log.csv = " + EpochLog::csv_header() + "\n"
        "  eval:  summary.csv = " + EvaluationReport::summary_header() + "\n"
        "         pairs.csv = pair,<one PSNR column per model>\n"
        "Every command writes config.txt (resolved settings) into --out-dir.\n"
        "Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.",
        "lgt"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals glob;
    for (int i = 0; i < argc; ++i) glob.command_line += (i ? " " : "") + std::string(argv[i]);
    app.add_option("--config", glob.config_path, "Settings file ([section] key = value)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", glob.seed, "Random seed (overrides run.seed)");
    app.add_option("--threads", glob.threads, "Worker cap, 0 = all cores (overrides run.threads)");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a pairs file");
    c_synth->add_option("--kind", synth.kind, "affine6 | translate1d | translation | mixed | frames")
        ->check(CLI::IsMember({"affine6", "translate1d", "translation", "mixed", "frames"}))
        ->capture_default_str();
    c_synth->add_option("--count", synth.count, "Number of pairs")
        ->check(kAtLeastOne)
        ->capture_default_str();
    c_synth->add_option("--shift", synth.shift, "translate1d: horizontal shift in pixels")
        ->capture_default_str();
    c_synth->add_option("--max-shift", synth.max_shift, "translation/mixed: per-axis shift bound")
        ->capture_default_str();
    c_synth->add_option("--max-log-gain", synth.max_log_gain, "mixed: log brightness gain bound")
        ->capture_default_str();
    c_synth->add_option("--patch", synth.patch, "Square patch size (affine6: 11, else 17)")
        ->check(CLI::PositiveNumber);
    c_synth->add_option("--mask", synth.mask, "Square scored-region size (affine6: 11, else 9)")
        ->check(CLI::PositiveNumber);
    c_synth->add_option("--frames", synth.frames, "frames: directory of P5 PGM frames");
    c_synth->add_option("--stride", synth.stride, "frames: patch corner lattice")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();

    InferArgs infer;
    auto* c_infer = app.add_subcommand("infer", "Infer per-pair coefficients");
    c_infer->add_option("--pairs", infer.pairs, "LGP1 pairs file")->required();
    c_infer->add_option("--operators", infer.operators, "LGT1 operator file");
    c_infer->add_flag("--affine", infer.affine, "Use the six hand-coded affine operators");
    c_infer->add_flag("--translations", infer.translations,
                      "Use whole-patch horizontal and vertical translation");
    c_infer->add_flag("--no-blur", infer.no_blur, "Pin sigma at 0 instead of adapting it");
    c_infer->add_option("--restarts", infer.restarts, "Extra random starts per pair");
    c_infer->add_option("--truth", infer.truth, "Truth CSV from synth; prints recovery statistics")
        ->check(CLI::ExistingFile);
    c_infer->add_option("--out-dir", infer.out_dir, "Output directory")->required();

    TrainArgs trn;
    auto* c_train = app.add_subcommand("train", "Learn operators by alternating inference and updates");
    c_train->add_option("--pairs", trn.pairs, "LGP1 pool; each epoch samples a batch")->required();
    c_train->add_option("--ops", trn.ops, "Number of operators K (overrides train.n_ops)")
        ->check(CLI::PositiveNumber);
    c_train->add_flag("--fix-translations", trn.fix_translations,
                      "Hold operators 0 and 1 at whole-patch horizontal/vertical translation");
    c_train->add_option("--epochs", trn.epochs, "Epochs (overrides train.epochs; 0 = initial only)")
        ->check(CLI::NonNegativeNumber);
    c_train->add_option("--batch", trn.batch, "Pairs per epoch (overrides train.batch_size)")
        ->check(CLI::PositiveNumber);
    c_train->add_option("--resume", trn.resume, "Continue from initial.lgt or epoch_NNNN.lgt");
    c_train->add_option("--out-dir", trn.out_dir, "Output directory")->required();

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Compare prediction models by masked PSNR");
    c_eval->add_option("--pairs", ev.pairs, "LGP1 pairs file")->required();
    c_eval->add_option("--models", ev.models,
                       "Comma list of no_transform, mc_full_pixel (mc_full), mc_quarter_pixel "
                       "(mc_quarter), cont_translation_no_sigma, cont_translation_sigma, "
                       "translation_plus_learned, learned_15. Default: all models whose "
                       "operator files are available");
    c_eval->add_option("--tpl-model", ev.tpl_model, "LGT1 file for translation_plus_learned");
    c_eval->add_option("--learned15-model", ev.learned15_model, "LGT1 file for learned_15");
    c_eval->add_option("--search-radius", ev.search_radius,
                       "Motion-compensation radius (default: buffer width)")
        ->check(CLI::NonNegativeNumber);
    c_eval->add_option("--out-dir", ev.out_dir, "Output directory")->required();

    std::size_t instances = 50;
    std::string gc_out;
    auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
    c_grad->add_option("--instances", instances, "Random problems")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_grad->add_option("--out-dir", gc_out, "Optional directory for config.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (c_synth->parsed()) return cmd_synth(synth, glob);
        if (c_infer->parsed()) return cmd_infer(infer, glob);
        if (c_train->parsed()) return cmd_train(trn, glob);
        if (c_eval->parsed()) return cmd_eval(ev, glob);
        if (c_grad->parsed()) return cmd_gradcheck(instances, gc_out, glob);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const BadFrame& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const EmptyDir& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const MissingModelFile& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const DimensionMismatch& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NonDiagonalizable& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Overflow& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const NonFiniteObjective& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const AllRestartsFailed& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DegenerateColumn& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
