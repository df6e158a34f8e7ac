#include <fstream>
#include <sstream>

#include <doctest.h>

#include "lgt/config.hpp"
#include "scratch_dir.hpp"

using namespace lgt;

namespace {

RunConfig parse(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    return parse_run_config(in, base);
}

}  // namespace

TEST_CASE("RunConfig: sections, comments, overrides") {
    const RunConfig c = parse(
        "# experiment\n"
        "[run]\n"
        "seed = 42\n"
        "  threads=2  \n"
        "; energy weights\n"
        "[energy]\n"
        "eta_d = 0.01\n"
        "convention = earlier\n"
        "[inference]\n"
        "blur = frozen_zero\n"
        "restarts = 3\n"
        "grad_tol = 1e-8\n"
        "[train]\n"
        "n_ops = 3\n"
        "fixed_ops = 0, 1\n"
        "epochs = 5\n"
        "epochs = 7\n"
        "[eval]\n"
        "search_radius = 2\n");
    CHECK(c.seed == 42);
    CHECK(c.threads == 2);
    CHECK(c.eta_d == 0.01);
    CHECK(c.eta_n == 1.0);
    CHECK(c.convention == IntermediateConvention::EarlierIndicesActed);
    CHECK(c.blur == BlurMode::FrozenZero);
    CHECK(c.restarts == 3);
    CHECK(c.inference_minimize.grad_tol == 1e-8);
    CHECK(c.n_ops == 3);
    CHECK(c.fixed_ops == std::vector<std::size_t>{0, 1});
    CHECK(c.epochs == 7);
    CHECK(c.search_radius == 2);
}

TEST_CASE("RunConfig: rejects unknown keys and malformed lines") {
    CHECK_THROWS_AS(parse("[run]\nsed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("seed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[nope]\nseed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nseed 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nseed = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nseed = 1x\n"), ConfigError);
    CHECK_THROWS_AS(parse("[energy]\neta_n = nan\n"), ConfigError);
    CHECK_THROWS_AS(parse("[energy]\nconvention = sideways\n"), ConfigError);
    CHECK_THROWS_AS(parse("[inference]\nblur = maybe\n"), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/run.cfg"), ConfigError);
    RunConfig c;
    CHECK_THROWS_AS(c.set("run.colour", "blue"), ConfigError);
}

TEST_CASE("RunConfig: text form round-trips and lists every key") {
    RunConfig c;
    c.seed = 9;
    c.eta_sigma = 0.1 + 0.2;  // not exactly representable in short decimal
    c.fixed_ops = {0, 1};
    c.blur = BlurMode::FrozenZero;
    c.m_step.max_iters = 12;
    const std::string text = c.to_text();
    const RunConfig back = parse(text);
    CHECK(back.seed == 9);
    CHECK(back.eta_sigma == c.eta_sigma);
    CHECK(back.fixed_ops == c.fixed_ops);
    CHECK(back.blur == BlurMode::FrozenZero);
    CHECK(back.m_step.max_iters == 12);
    CHECK(back.to_text() == text);
    for (const std::string& key : RunConfig::keys()) {
        CHECK(text.find(key.substr(key.find('.') + 1) + " = ") != std::string::npos);
    }
}

TEST_CASE("RunConfig: maps onto library settings") {
    const RunConfig c = parse("[energy]\neta_n = 2\n[inference]\nmemory = 4\n[train]\nbatch_size = 8\n");
    const EnergyConfig e = c.energy(9);
    CHECK(e.eta_n == 2.0);
    CHECK(e.mask.size() == 9);
    CHECK(e.mask.all());
    CHECK(c.inference().minimize.memory == 4);
    CHECK(c.train().batch_size == 8);
    CHECK(c.train().seed == c.seed);
}

TEST_CASE("load_run_config: layers over a base") {
    ScratchDir dir("config");
    std::ofstream(dir / "a.cfg") << "[run]\nseed = 5\n";
    RunConfig base;
    base.epochs = 3;
    const RunConfig c = load_run_config(dir / "a.cfg", base);
    CHECK(c.seed == 5);
    CHECK(c.epochs == 3);
}
