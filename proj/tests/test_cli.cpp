#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <doctest.h>

#include "lgt/data.hpp"
#include "lgt/evaluate.hpp"
#include "lgt/operator_io.hpp"
#include "scratch_dir.hpp"

using namespace lgt;
namespace fs = std::filesystem;

namespace {

// Runs the command-line tool with `args`; output goes to `log`.
int lgt_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(LGT_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream s(line);
        for (std::string cell; std::getline(s, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("cli: synth is deterministic under --seed") {
    ScratchDir dir("cli_synth");
    const fs::path log = dir / "log.txt";
    REQUIRE(lgt_cli("--seed 7 synth --kind affine6 --count 100 --out-dir " + (dir / "a").string(), log) == 0);
    REQUIRE(lgt_cli("--seed 7 synth --kind affine6 --count 100 --out-dir " + (dir / "b").string(), log) == 0);
    CHECK(slurp(dir / "a" / "pairs.lgp") == slurp(dir / "b" / "pairs.lgp"));
    CHECK(slurp(dir / "a" / "truth.csv") == slurp(dir / "b" / "truth.csv"));
    CHECK(read_csv(dir / "a" / "truth.csv").size() == 101);
    CHECK(read_pairs(dir / "a" / "pairs.lgp").pairs.size() == 100);
    CHECK(slurp(dir / "a" / "config.txt").find("seed = 7") != std::string::npos);
}

TEST_CASE("cli: translate1d pairs carry the requested shift, eval subsets models") {
    ScratchDir dir("cli_shift");
    const fs::path log = dir / "log.txt";
    REQUIRE(lgt_cli("synth --kind translate1d --shift 3 --count 4 --out-dir " + dir.path.string(), log) == 0);
    const PairsFile f = read_pairs(dir / "pairs.lgp");
    for (const PatchPair& p : f.pairs) {
        const MotionMatch m = mc_full_pixel(p, f.geometry, 4);
        CHECK(m.dx == 3.0);
        CHECK(m.dy == 0.0);
    }
    REQUIRE(lgt_cli("eval --pairs " + (dir / "pairs.lgp").string() + " --models mc_full,mc_quarter --out-dir " +
                        (dir / "eval").string(),
                    log) == 0);
    const auto summary = read_csv(dir / "eval" / "summary.csv");
    REQUIRE(summary.size() == 3);
    CHECK(summary[1][0] == "mc_full_pixel");
    CHECK(summary[2][0] == "mc_quarter_pixel");
    CHECK(read_csv(dir / "eval" / "pairs.csv")[0] ==
          std::vector<std::string>{"pair", "mc_full_pixel", "mc_quarter_pixel"});
}

TEST_CASE("cli: identity pairs infer to zero; --no-blur pins sigma") {
    ScratchDir dir("cli_infer");
    const fs::path log = dir / "log.txt";
    REQUIRE(lgt_cli("synth --kind translate1d --shift 0 --count 3 --out-dir " + dir.path.string(), log) == 0);
    const std::string pairs = (dir / "pairs.lgp").string();
    REQUIRE(lgt_cli("infer --pairs " + pairs + " --translations --out-dir " + (dir / "a").string(), log) == 0);
    const auto rows = read_csv(dir / "a" / "coefficients.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"pair", "mu_0", "mu_1", "sigma_0", "sigma_1", "energy", "psnr",
                                              "converged"});
    for (std::size_t r = 1; r < rows.size(); ++r) {
        CHECK(std::abs(std::stod(rows[r][1])) < 1e-3);
        CHECK(std::abs(std::stod(rows[r][2])) < 1e-3);
    }

    REQUIRE(lgt_cli("infer --pairs " + pairs + " --translations --no-blur --out-dir " + (dir / "b").string(),
                    log) == 0);
    const auto frozen = read_csv(dir / "b" / "coefficients.csv");
    REQUIRE(frozen.size() == 4);
    for (std::size_t r = 1; r < frozen.size(); ++r) {
        CHECK(std::stod(frozen[r][3]) == 0.0);
        CHECK(std::stod(frozen[r][4]) == 0.0);
    }
}

TEST_CASE("cli: train checkpoints, fixed translations, resume") {
    ScratchDir dir("cli_train");
    const fs::path log = dir / "log.txt";
    REQUIRE(lgt_cli("--seed 3 synth --kind translation --count 12 --patch 7 --mask 3 --out-dir " +
                        dir.path.string(),
                    log) == 0);
    const std::string pool = "--pairs " + (dir / "pairs.lgp").string();
    const std::string common = "--seed 3 train " + pool + " --ops 3 --fix-translations --batch 4 ";

    REQUIRE(lgt_cli(common + "--epochs 0 --out-dir " + (dir / "zero").string(), log) == 0);
    CHECK(fs::exists(dir / "zero" / "initial.lgt"));
    CHECK(!fs::exists(dir / "zero" / "epoch_0000.lgt"));
    CHECK(read_csv(dir / "zero" / "train_log.csv").size() == 1);

    REQUIRE(lgt_cli(common + "--epochs 2 --out-dir " + (dir / "full").string(), log) == 0);
    const TransformChain trained = read_operators(dir / "full" / "epoch_0001.lgt");
    const TransformChain fixed = translation_chain({7, 7, 3, 3});
    REQUIRE(trained.size() == 3);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(trained[k].u() == fixed[k].u());
        CHECK(trained[k].lambda() == fixed[k].lambda());
    }
    CHECK(read_csv(dir / "full" / "train_log.csv").size() == 3);

    REQUIRE(lgt_cli(common + "--epochs 1 --out-dir " + (dir / "half").string(), log) == 0);
    REQUIRE(lgt_cli(common + "--epochs 2 --resume " + (dir / "half" / "epoch_0000.lgt").string() +
                        " --out-dir " + (dir / "half").string(),
                    log) == 0);
    CHECK(slurp(dir / "half" / "epoch_0001.lgt") == slurp(dir / "full" / "epoch_0001.lgt"));
    CHECK(read_csv(dir / "half" / "train_log.csv").size() == 3);
}

TEST_CASE("cli: exit codes") {
    ScratchDir dir("cli_exit");
    const fs::path log = dir / "log.txt";
    const std::string out = " --out-dir " + dir.path.string();
    CHECK(lgt_cli("--help", log) == 0);
    CHECK(lgt_cli("synth --count 0" + out, log) == 1);
    CHECK(lgt_cli("synth --kind spiral" + out, log) == 1);
    CHECK(lgt_cli("frobnicate", log) == 1);
    CHECK(lgt_cli("infer --pairs " + (dir / "none.lgp").string() + " --translations" + out, log) == 2);

    REQUIRE(lgt_cli("synth --kind translation --count 2" + out, log) == 0);
    const std::string pairs = " --pairs " + (dir / "pairs.lgp").string();
    CHECK(lgt_cli("infer" + pairs + out, log) == 1);
    CHECK(lgt_cli("infer" + pairs + " --affine --translations" + out, log) == 1);
    CHECK(lgt_cli("infer" + pairs + " --operators " + (dir / "none.lgt").string() + out, log) == 2);
    CHECK(lgt_cli("eval" + pairs + " --models learned_15" + out, log) == 2);

    std::ofstream(dir / "bad.cfg") << "[run]\ncolour = blue\n";
    CHECK(lgt_cli("--config " + (dir / "bad.cfg").string() + " gradcheck --instances 1", log) == 1);
    CHECK(lgt_cli("gradcheck --instances 3", log) == 0);
    CHECK(slurp(log).find("max relative error") != std::string::npos);
}
