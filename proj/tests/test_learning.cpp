#include <cmath>
#include <random>

#include <doctest.h>

#include "lgt/affine.hpp"
#include "lgt/learning.hpp"
#include "oracles.hpp"

using namespace lgt;

namespace {

constexpr Index kN = 8;

BatchProvider shifted_noise_batches(Index n) {
    return [n](int epoch, std::size_t count) {
        const LieOperator truth = make_fourier_translation(n);
        std::mt19937_64 rng(100 + static_cast<std::uint64_t>(epoch));
        std::uniform_real_distribution<double> shift(-1.0, 1.0);
        std::vector<PatchPair> out;
        for (std::size_t t = 0; t < count; ++t) {
            PatchPair p{oracle::white_noise(rng, n), {}, t};
            p.tgt = apply_exact(truth, shift(rng), p.src);
            out.push_back(std::move(p));
        }
        return out;
    };
}

TrainSpec small_spec(int epochs) {
    TrainSpec spec;
    spec.batch_size = 12;
    spec.epochs = epochs;
    spec.seed = 3;
    spec.init_scale = 0.1;
    spec.m_step.max_iters = 10;
    return spec;
}

bool same_operator(const LieOperator& a, const LieOperator& b) {
    return a.u() == b.u() && a.lambda() == b.lambda();
}

// A unitary matrix: Q factor of a complex Gaussian matrix.
ComplexMatrix random_unitary(std::mt19937_64& rng, Index n) {
    const ComplexMatrix g = oracle::gaussian_matrix(rng, n, n).cast<Complex>() +
                            Complex(0.0, 1.0) * oracle::gaussian_matrix(rng, n, n).cast<Complex>();
    return Eigen::HouseholderQR<ComplexMatrix>(g).householderQ();
}

ComplexVector random_spectrum(std::mt19937_64& rng, Index n) {
    const RealVector re = oracle::white_noise(rng, n), im = oracle::white_noise(rng, n);
    ComplexVector l(n);
    for (Index i = 0; i < n; ++i) l[i] = Complex(re[i], im[i]);
    return l;
}

ComplexMatrix generator_of(const LieOperator& op) {
    return op.u() * op.lambda().asDiagonal() * op.u_inv();
}

}  // namespace

TEST_CASE("mix_seed: deterministic and stream-separated") {
    CHECK(mix_seed(1, 0) == mix_seed(1, 0));
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
}

TEST_CASE("random_operator: near identity at small scale") {
    std::mt19937_64 rng(1);
    const LieOperator op = random_operator(kN, 0.01, rng);
    CHECK((op.u() - ComplexMatrix::Identity(kN, kN)).cwiseAbs().maxCoeff() < 0.1);
    CHECK(op.spectral_radius() < 0.1);
}

TEST_CASE("initial_chain: presets are kept, the rest is seeded") {
    TrainSpec spec = small_spec(1);
    spec.n_ops = 2;
    const LieOperator preset = make_fourier_translation(kN);
    const TransformChain a = initial_chain(kN, spec, {preset, std::nullopt});
    const TransformChain b = initial_chain(kN, spec, {preset, std::nullopt});
    CHECK(same_operator(a[0], preset));
    CHECK(same_operator(a[1], b[1]));
    CHECK_THROWS_AS(initial_chain(kN, spec, {preset}), DimensionMismatch);
    CHECK_THROWS_AS(initial_chain(kN, spec, {make_fourier_translation(4), std::nullopt}),
                    DimensionMismatch);
}

TEST_CASE("m_step: zero coefficients are a fixed point") {
    // With mu = sigma = 0 every transform is the identity whatever the
    // operator, so the operator gradient vanishes.
    const TrainSpec spec = small_spec(1);
    const TransformChain chain = initial_chain(kN, spec);
    const std::vector<PatchPair> pairs = shifted_noise_batches(kN)(0, 5);
    const std::vector<Coefficients> coeffs(pairs.size(), Coefficients::zeros(1));
    const MStepResult m = m_step(chain, coeffs, pairs, EnergyConfig::defaults(kN), spec);
    CHECK(m.grad_norm < 1e-10);
    CHECK(m.energy_after == m.energy_before);
    CHECK(same_operator(m.chain[0], chain[0]));
}

TEST_CASE("m_step: never raises the batch energy") {
    const TrainSpec spec = small_spec(1);
    const TransformChain chain = initial_chain(kN, spec);
    const std::vector<PatchPair> pairs = shifted_noise_batches(kN)(0, 8);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<Coefficients> coeffs;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        Coefficients c = Coefficients::zeros(1);
        c.mu[0] = g(rng);
        c.sigma[0] = 0.1;
        coeffs.push_back(c);
    }
    const EnergyConfig config = EnergyConfig::defaults(kN);
    const MStepResult m = m_step(chain, coeffs, pairs, config, spec);
    CHECK(m.grad_norm > 0.0);
    CHECK(m.energy_after < m.energy_before);
    const double recomputed = energy_total(m.chain, coeffs, pairs, config, {false, false}).total;
    CHECK(recomputed == doctest::Approx(m.energy_after).epsilon(1e-9));
}

TEST_CASE("rescale_degeneracy: balanced basis is untouched") {
    std::mt19937_64 rng(3);
    const LieOperator op = LieOperator::from_eigen(random_unitary(rng, kN), random_spectrum(rng, kN));
    const LieOperator r = rescale_degeneracy(op);
    CHECK((r.u() - op.u()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rescale_degeneracy: undoes a column scaling") {
    std::mt19937_64 rng(4);
    const ComplexMatrix q = random_unitary(rng, 2);
    const ComplexVector l = random_spectrum(rng, 2);
    const Eigen::Vector2cd d(10.0, 0.1);
    const LieOperator op = LieOperator::from_eigen(q * d.asDiagonal(), l);
    const LieOperator r = rescale_degeneracy(op);
    CHECK((r.u() - q).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(joint_power(r.u(), r.u_inv()) == doctest::Approx(4.0));
}

TEST_CASE("rescale_degeneracy: generator invariant, joint power locally minimal") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix u = ComplexMatrix::Identity(kN, kN) +
                                0.5 * oracle::gaussian_matrix(rng, kN, kN).cast<Complex>();
        const LieOperator op = LieOperator::from_eigen(u, random_spectrum(rng, kN));
        const LieOperator r = rescale_degeneracy(op);
        const ComplexMatrix a0 = generator_of(op), a1 = generator_of(r);
        CHECK((a1 - a0).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, a0.cwiseAbs().maxCoeff()));

        const double p0 = joint_power(r.u(), r.u_inv());
        CHECK(p0 <= joint_power(op.u(), op.u_inv()) * (1.0 + 1e-12));
        for (Index j = 0; j < kN; ++j) {
            for (double f : {0.99, 1.01}) {
                ComplexMatrix u2 = r.u(), w2 = r.u_inv();
                u2.col(j) *= f;
                w2.row(j) /= f;
                CHECK(joint_power(u2, w2) >= p0);
            }
        }
    }
}

TEST_CASE("train: zero epochs leaves the chain untouched") {
    const TrainSpec spec = small_spec(0);
    const TransformChain chain = initial_chain(kN, spec);
    const TrainResult r = train(shifted_noise_batches(kN), EnergyConfig::defaults(kN), spec, chain);
    CHECK(r.log.empty());
    CHECK(same_operator(r.chain[0], chain[0]));
}

TEST_CASE("train: energy falls within each epoch, fixed operators stay bit-identical") {
    TrainSpec spec = small_spec(2);
    spec.n_ops = 2;
    spec.fixed_ops = {0};
    const TransformChain chain = initial_chain(kN, spec, {make_fourier_translation(kN), std::nullopt});
    int callbacks = 0;
    const TrainResult r = train(shifted_noise_batches(kN), EnergyConfig::defaults(kN), spec, chain, 0,
                                [&](const EpochLog&, const TransformChain&) { ++callbacks; });
    CHECK(callbacks == 2);
    REQUIRE(r.log.size() == 2);
    for (const EpochLog& e : r.log) {
        CHECK(e.pairs_used == spec.batch_size);
        CHECK(e.e_post <= e.e_pre * (1.0 + 1e-9));
    }
    CHECK(same_operator(r.chain[0], chain[0]));
    CHECK(!same_operator(r.chain[1], chain[1]));
}

TEST_CASE("train: deterministic, and resuming reproduces an uninterrupted run") {
    const TrainSpec spec = small_spec(2);
    const EnergyConfig config = EnergyConfig::defaults(kN);
    const TransformChain chain = initial_chain(kN, spec);
    const TrainResult full = train(shifted_noise_batches(kN), config, spec, chain);
    const TrainResult again = train(shifted_noise_batches(kN), config, spec, chain);
    CHECK(same_operator(full.chain[0], again.chain[0]));

    TrainSpec first = spec;
    first.epochs = 1;
    const TrainResult half = train(shifted_noise_batches(kN), config, first, chain);
    const TrainResult resumed = train(shifted_noise_batches(kN), config, spec, half.chain, 1);
    REQUIRE(resumed.log.size() == 1);
    CHECK(resumed.log[0].epoch == 1);
    CHECK(resumed.log[0].e_post == full.log[1].e_post);
    CHECK(same_operator(resumed.chain[0], full.chain[0]));
}

TEST_CASE("TrainSpec: validation") {
    TrainSpec spec;
    spec.n_ops = 2;
    spec.fixed_ops = {2};
    CHECK_THROWS(spec.validate());
    spec.fixed_ops = {0, 1, 1};
    CHECK_THROWS(spec.validate());
    spec.fixed_ops = {};
    spec.batch_size = 0;
    CHECK_THROWS(spec.validate());
    spec.batch_size = 1;
    spec.init_scale = 0.0;
    CHECK_THROWS(spec.validate());
}

TEST_CASE("EpochLog: CSV row") {
    EpochLog e;
    e.epoch = 4;
    e.e_pre = 2.5;
    e.e_post = 2.0;
    e.reverted = {1, 3};
    CHECK(EpochLog::csv_header() ==
          "epoch,E_pre,E_post,mean_psnr,grad_norm,pairs_used,pairs_skipped,reverted");
    CHECK(e.csv_line() == "4,2.5,2,0,0,0,0,1;3");
}
