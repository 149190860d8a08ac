#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "molgp/gp.hpp"
#include "molgp/kernels.hpp"
#include "molgp/smiles.hpp"
#include "support/test_corpus.hpp"

using namespace molgp;
namespace ts = molgp::testsupport;

namespace {

Fingerprint fp_from_bits(int n_bits, const std::vector<int>& bits) {
  Fingerprint fp(n_bits);
  for (int b : bits) fp.set(b);
  return fp;
}

// Synthetic fingerprints with no near-duplicates, for conditioning-sensitive
// checks.
std::vector<Fingerprint> distinct_fingerprints(std::size_t n, std::uint64_t seed,
                                               double max_similarity) {
  const FingerprintConfig cfg{2048, 3};
  const TanimotoConfig unit{1.0};
  std::vector<Fingerprint> out;
  std::mt19937_64 rng(seed);
  while (out.size() < n) {
    const Molecule m = parse(ts::random_smiles(rng));
    const Fingerprint fp = fingerprint(m, cfg);
    bool ok = fp.popcount() > 0;
    for (const auto& other : out)
      if (tanimoto(fp, other, unit) > max_similarity) {
        ok = false;
        break;
      }
    if (ok) out.push_back(fp);
  }
  return out;
}

std::vector<double> seeded_targets(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> y(n);
  for (auto& v : y) v = ts::standard_normal(rng) * 2.0 + 1.0;
  return y;
}

}  // namespace

TEST_SUITE_BEGIN("gp");

TEST_CASE("fit preconditions") {
  const TanimotoConfig kcfg{1.0};
  const NoiseConfig noise{0.1, 1e-6};
  std::vector<Fingerprint> one = {fp_from_bits(64, {1})};
  CHECK_THROWS_AS(fit(Inputs{one}, std::vector<double>{1.0}, kcfg, noise), GpError);

  std::vector<Fingerprint> two = {fp_from_bits(64, {1}), fp_from_bits(64, {2})};
  CHECK_THROWS_AS(fit(Inputs{two}, std::vector<double>{1.0}, kcfg, noise), GpError);

  try {
    fit(Inputs{two}, std::vector<double>{3.0, 3.0}, kcfg, noise);
    FAIL_CHECK("expected ConstantTargets");
  } catch (const GpError& e) {
    CHECK(e.kind == GpError::Kind::ConstantTargets);
  }

  CHECK_THROWS_AS(NoiseConfig{1e-9, 1e-6}.validate(), std::invalid_argument);
}

TEST_CASE("two identical inputs match the closed-form solve") {
  // Both training molecules share one fingerprint, so K is the all-sigma^2
  // matrix and the predictive mean at that input is the shrunk average.
  std::vector<Fingerprint> fps = {fp_from_bits(64, {1, 5}), fp_from_bits(64, {1, 5})};
  const std::vector<double> y = {1.0, 3.0};
  const NoiseConfig noise{0.1, 1e-6};
  const TanimotoConfig kcfg{1.0};

  const GpModel model = fit(Inputs{fps}, y, kcfg, noise);

  // Oracle: explicit 2x2 inverse on standardized targets.
  const double mu = 2.0, sd = 1.0;  // population stats of {1, 3}
  const double a = 1.0 + noise.noise_variance + noise.jitter;
  const double b = 1.0;
  const double det = a * a - b * b;
  const double a0 = (a * ((y[0] - mu) / sd) - b * ((y[1] - mu) / sd)) / det;
  const double a1 = (-b * ((y[0] - mu) / sd) + a * ((y[1] - mu) / sd)) / det;
  const double mean_std = 1.0 * a0 + 1.0 * a1;

  const auto pred = model.predict(Inputs{std::vector<Fingerprint>{fps[0]}});
  REQUIRE(pred.size() == 1);
  CHECK(pred[0].mean == doctest::Approx(mean_std * sd + mu).epsilon(1e-12));
  CHECK(pred[0].mean == doctest::Approx(2.0).epsilon(1e-9));  // symmetric average
  CHECK(model.target_stats().mean == doctest::Approx(2.0));
  CHECK(model.target_stats().std == doctest::Approx(1.0));
}

TEST_CASE("identity gram log marginal likelihood closed forms") {
  // Disjoint fingerprints make the unit Tanimoto Gram exactly the identity.
  std::vector<Fingerprint> fps = {fp_from_bits(64, {1, 2}), fp_from_bits(64, {3, 4})};
  const std::vector<double> y = {1.0, 3.0};  // standardizes to -1, +1

  SUBCASE("noise at the floor") {
    const GpModel m = fit(Inputs{fps}, y, TanimotoConfig{1.0}, NoiseConfig{1e-8, 0.0});
    const double expected = -1.0 - std::log(2.0 * std::numbers::pi);
    CHECK(m.log_marginal_likelihood() == doctest::Approx(expected).epsilon(1e-7));
  }

  SUBCASE("independent scalars at noise 0.25") {
    const double s2n = 0.25;
    const GpModel m = fit(Inputs{fps}, y, TanimotoConfig{1.0}, NoiseConfig{s2n, 0.0});
    double expected = 0.0;
    for (double ystd : {-1.0, 1.0})
      expected += -0.5 * ystd * ystd / (1.0 + s2n) - 0.5 * std::log(1.0 + s2n) -
                  0.5 * std::log(2.0 * std::numbers::pi);
    CHECK(m.log_marginal_likelihood() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("fit_core single point closed form") {
  Eigen::MatrixXd k(1, 1);
  k(0, 0) = 1.0;
  Eigen::VectorXd y(1);
  y(0) = 1.0;
  const CoreFit f = fit_core(k, y, NoiseConfig{0.1, 0.0});

  CHECK(f.alpha(0) == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
  const double mean_std = 1.0 * f.alpha(0);
  CHECK(mean_std == doctest::Approx(0.909090909090909).epsilon(1e-9));

  Eigen::VectorXd kstar(1);
  kstar(0) = 1.0;
  const Eigen::VectorXd v = f.L.triangularView<Eigen::Lower>().solve(kstar);
  const double latent = 1.0 - v.squaredNorm();
  CHECK(latent == doctest::Approx(0.090909090909091).epsilon(1e-9));

  const double expected_lml = -0.5 / 1.1 - 0.5 * std::log(1.1) -
                              0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(f.lml == doctest::Approx(expected_lml).epsilon(1e-12));
}

TEST_CASE("cholesky failure escalates jitter then throws") {
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  try {
    fit_core(indefinite, y, NoiseConfig{1e-8, 0.0});
    FAIL_CHECK("expected CholeskyFailure");
  } catch (const GpError& e) {
    CHECK(e.kind == GpError::Kind::CholeskyFailure);
  }

  // Near-singular but PSD: succeeds, possibly via the escalated jitter.
  Eigen::MatrixXd psd(2, 2);
  psd << 1.0, 1.0, 1.0, 1.0;
  const CoreFit f = fit_core(psd, y, NoiseConfig{1e-8, 1e-10});
  CHECK(f.jitter_applied <= 1e-4);
}

TEST_CASE("prediction reverts to the prior at zero similarity") {
  const auto fps = distinct_fingerprints(20, 101, 0.95);
  const auto y = seeded_targets(fps.size(), 5);
  const NoiseConfig noise{0.1, 1e-6};
  const GpModel model = fit(Inputs{fps}, y, TanimotoConfig{1.0}, noise);

  // A fingerprint sharing no bits with any training molecule.
  std::set<int> used;
  const TanimotoConfig unit{1.0};
  Fingerprint probe(2048);
  for (int bit = 0; bit < 2048 && probe.popcount() < 4; ++bit) {
    bool free = true;
    for (const auto& fp : fps)
      if (fp.test(bit)) {
        free = false;
        break;
      }
    if (free) probe.set(bit);
  }
  REQUIRE(probe.popcount() == 4);

  const auto pred = model.predict(Inputs{std::vector<Fingerprint>{probe}});
  const TargetStats stats = model.target_stats();
  CHECK(pred[0].mean == doctest::Approx(stats.mean).epsilon(1e-12));
  const double expected_std =
      std::sqrt(1.0 + noise.noise_variance + noise.jitter) * stats.std;
  CHECK(pred[0].std == doctest::Approx(expected_std).epsilon(1e-9));
}

TEST_CASE("near-noiseless gp interpolates the training targets") {
  const auto fps = distinct_fingerprints(50, 303, 0.95);
  const auto y = seeded_targets(fps.size(), 7);
  const GpModel model =
      fit(Inputs{fps}, y, TanimotoConfig{1.0}, NoiseConfig{1e-8, 1e-10});
  const auto preds = model.predict(Inputs{fps});
  const TargetStats stats = model.target_stats();
  for (std::size_t i = 0; i < preds.size(); ++i)
    CHECK(std::abs(preds[i].mean - y[i]) / stats.std < 1e-3);
}

TEST_CASE("cholesky reconstruction error is tiny") {
  const auto corpus = ts::synthetic_corpus(120, 404);
  const auto fps = ts::corpus_fingerprints(corpus, FingerprintConfig{2048, 3});
  const auto y = seeded_targets(fps.size(), 11);

  std::mt19937_64 rng(55);
  for (int draw = 0; draw < 3; ++draw) {
    const double s2 = std::exp(-1.0 + 2.0 * ts::uniform01(rng));
    const double noise_var = std::exp(-4.0 + 3.0 * ts::uniform01(rng));
    const TanimotoConfig kcfg{s2};
    const NoiseConfig noise{noise_var, 1e-6};

    const GpModel model = fit(Inputs{fps}, y, kcfg, noise);
    const Eigen::MatrixXd k = gram(Inputs{fps}, KernelConfig{kcfg}).values;
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise.noise_variance + model.jitter_applied();
    const Eigen::MatrixXd& l = model.cholesky_factor();
    const double err = (l * l.transpose() - a).norm() / k.norm();
    CHECK(err < 1e-8);

    // alpha solves the system it claims to solve.
    Eigen::VectorXd ystd(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i)
      ystd(static_cast<Eigen::Index>(i)) =
          (y[i] - model.target_stats().mean) / model.target_stats().std;
    const double res = (a * model.alpha() - ystd).norm() / ystd.norm();
    CHECK(res < 1e-8);
  }
}

TEST_CASE("lml is invariant to target translation and smooth over the grid") {
  const auto fps = distinct_fingerprints(30, 77, 0.999);
  auto y = seeded_targets(fps.size(), 13);

  const TanimotoConfig kcfg{1.3};
  const NoiseConfig noise{0.2, 1e-6};
  const double base = log_marginal_likelihood(Inputs{fps}, y, kcfg, noise);
  auto shifted = y;
  for (double& v : shifted) v += 12.75;
  CHECK(log_marginal_likelihood(Inputs{fps}, shifted, kcfg, noise) ==
        doctest::Approx(base).epsilon(1e-10));

  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double s2 = std::exp(-3.0 + 6.0 * i / 9.0);
      const double nv = std::exp(-6.0 + 7.0 * j / 9.0);
      const double lml =
          log_marginal_likelihood(Inputs{fps}, y, TanimotoConfig{s2}, NoiseConfig{nv, 1e-6});
      CHECK(std::isfinite(lml));
    }
  }
}

TEST_CASE("fit and predict are deterministic") {
  const auto fps = distinct_fingerprints(25, 909, 0.999);
  const auto y = seeded_targets(fps.size(), 17);
  const TanimotoConfig kcfg{0.9};
  const NoiseConfig noise{0.05, 1e-6};

  const GpModel m1 = fit(Inputs{fps}, y, kcfg, noise);
  const GpModel m2 = fit(Inputs{fps}, y, kcfg, noise);
  CHECK((m1.alpha() - m2.alpha()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m1.cholesky_factor() - m2.cholesky_factor()).cwiseAbs().maxCoeff() == 0.0);

  const auto p1 = m1.predict(Inputs{fps});
  const auto p2 = m2.predict(Inputs{fps});
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].mean == p2[i].mean);
    CHECK(p1[i].std == p2[i].std);
  }
}

TEST_CASE("predict rejects mismatched representations") {
  const auto fps = distinct_fingerprints(12, 31, 0.999);
  const auto y = seeded_targets(fps.size(), 19);
  const GpModel model = fit(Inputs{fps}, y, TanimotoConfig{1.0}, NoiseConfig{0.1, 1e-6});
  std::vector<SymbolSeq> seqs = {tokenize_symbols("CCO")};
  CHECK_THROWS_AS(model.predict(Inputs{seqs}), GpError);
}

TEST_CASE("optimizer recovers the noise scale from prior samples") {
  const auto corpus = ts::synthetic_corpus(200, 2024);
  const auto fps = ts::corpus_fingerprints(corpus, FingerprintConfig{2048, 3});

  const Eigen::MatrixXd k = gram(Inputs{fps}, TanimotoConfig{1.0}).values;
  std::mt19937_64 rng(31415);
  const Eigen::VectorXd f = ts::sample_gp_prior(k, 1e-6, rng);
  const double true_noise = 0.1;
  std::vector<double> y(fps.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = f(static_cast<Eigen::Index>(i)) +
           std::sqrt(true_noise) * ts::standard_normal(rng);

  OptBudget budget;
  budget.restarts = 2;
  budget.max_evals = 120;
  const OptResult opt = optimize_hyperparameters(
      Inputs{fps}, y, KernelFamily::Tanimoto, TanimotoConfig{1.0}, NoiseConfig{0.5, 1e-6},
      budget, false);

  // Standardization rescales the generating process; compare the recovered
  // noise fraction of the total variance against the generating fraction.
  double total_var = 0.0, mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  for (double v : y) total_var += (v - mean) * (v - mean);
  total_var /= static_cast<double>(y.size());
  const double generating_fraction = true_noise / total_var;
  const double recovered_fraction = opt.noise.noise_variance;  // standardized units
  CHECK(recovered_fraction > 0.5 * generating_fraction);
  CHECK(recovered_fraction < 2.0 * generating_fraction);
}

TEST_CASE("optimizer bookkeeping") {
  const auto fps = distinct_fingerprints(25, 515, 0.999);
  const auto y = seeded_targets(fps.size(), 23);

  OptBudget budget;
  budget.restarts = 3;
  budget.max_evals = 60;
  const OptResult opt = optimize_hyperparameters(
      Inputs{fps}, y, KernelFamily::Tanimoto, TanimotoConfig{1.0}, NoiseConfig{0.1, 1e-6},
      budget, false);

  REQUIRE(!opt.trace.empty());
  double best = -std::numeric_limits<double>::infinity();
  for (const OptStep& step : opt.trace) {
    best = std::max(best, step.value);
    CHECK(step.best == best);  // running-best bookkeeping
  }
  CHECK(opt.best_lml == best);
  CHECK(opt.best_lml >= opt.trace.front().value);

  const double refit = log_marginal_likelihood(Inputs{fps}, y, opt.kernel, opt.noise);
  CHECK(refit == doctest::Approx(opt.best_lml).epsilon(1e-9));

  // Fixed noise stays fixed.
  const OptResult fixed = optimize_hyperparameters(
      Inputs{fps}, y, KernelFamily::Tanimoto, TanimotoConfig{1.0}, NoiseConfig{0.37, 1e-6},
      budget, true);
  CHECK(fixed.noise.noise_variance == 0.37);
}

TEST_CASE("ssk hyperparameter optimization stays in bounds") {
  const auto corpus = ts::synthetic_corpus(30, 616);
  std::vector<SymbolSeq> seqs;
  for (const auto& s : corpus) seqs.push_back(tokenize_symbols(s));
  const auto y = seeded_targets(seqs.size(), 29);

  SskConfig init;
  init.max_subsequence_length = 3;
  OptBudget budget;
  budget.restarts = 2;
  budget.max_evals = 40;
  const OptResult opt = optimize_hyperparameters(Inputs{seqs}, y, KernelFamily::Ssk, init,
                                                 NoiseConfig{0.1, 1e-6}, budget, false);
  const SskConfig& got = std::get<SskConfig>(opt.kernel);
  CHECK(got.match_decay > 0.009);
  CHECK(got.match_decay <= 1.0);
  CHECK(got.gap_decay > 0.009);
  CHECK(got.gap_decay <= 1.0);
  CHECK(got.max_subsequence_length == 3);  // n is never optimized
  CHECK(std::isfinite(opt.best_lml));
}

TEST_SUITE_END();
