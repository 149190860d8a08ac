#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "molgp/evaluation.hpp"
#include "support/test_corpus.hpp"

using namespace molgp;
namespace ts = molgp::testsupport;

namespace {

// Independent quantile oracle: bisection on Phi(x) = erfc(-x/sqrt(2))/2,
// which is accurate for p <= 1/2; the upper half uses symmetry.
double quantile_oracle(double p) {
  if (p > 0.5) return -quantile_oracle(1.0 - p);
  double lo = -45.0, hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    if (cdf < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("split sizes and determinism") {
  SplitSpec spec;
  spec.train_fraction = 0.9;
  spec.n_repeats = 20;
  spec.seed = 7;

  const auto splits = split(10, spec);
  REQUIRE(splits.size() == 20);
  for (const auto& [train, test] : splits) {
    CHECK(train.size() == 9);
    CHECK(test.size() == 1);
  }

  const auto again = split(10, spec);
  for (std::size_t r = 0; r < splits.size(); ++r) {
    CHECK(splits[r].first == again[r].first);
    CHECK(splits[r].second == again[r].second);
  }

  SplitSpec other = spec;
  other.seed = 8;
  const auto different = split(10, other);
  bool any_difference = false;
  for (std::size_t r = 0; r < splits.size(); ++r)
    if (splits[r].first != different[r].first) any_difference = true;
  CHECK(any_difference);

  CHECK_THROWS_AS(split(9, spec), EvalError);
}

TEST_CASE("split partitions the index range") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t size = 10 + rng() % 60;
    SplitSpec spec;
    spec.train_fraction = 0.5 + 0.45 * ts::uniform01(rng);
    spec.n_repeats = 5;
    spec.seed = rng();
    for (const auto& [train, test] : split(size, spec)) {
      CHECK(train.size() ==
            std::clamp<std::size_t>(
                static_cast<std::size_t>(std::llround(spec.train_fraction * size)), 1,
                size - 1));
      std::vector<std::size_t> all(train);
      all.insert(all.end(), test.begin(), test.end());
      std::sort(all.begin(), all.end());
      for (std::size_t i = 0; i < size; ++i) CHECK(all[i] == i);
    }
  }
}

TEST_CASE("rmse arithmetic") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK(rmse(a, a) == 0.0);

  const std::vector<double> zeros = {0.0, 0.0};
  const std::vector<double> truth = {3.0, 4.0};
  CHECK(rmse(zeros, truth) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));

  // Constant offset on predictions gives |c|.
  std::vector<double> shifted = a;
  for (double& v : shifted) v += 1.75;
  CHECK(rmse(shifted, a) == doctest::Approx(1.75).epsilon(1e-12));

  // Translating predictions and truths together leaves the error unchanged.
  const std::vector<double> preds = {0.4, -1.2, 2.5};
  std::vector<double> preds_c = preds, truths_c = a;
  for (double& v : preds_c) v += 42.0;
  for (double& v : truths_c) v += 42.0;
  CHECK(rmse(preds_c, truths_c) == doctest::Approx(rmse(preds, a)).epsilon(1e-12));

  CHECK_THROWS_AS(rmse(a, zeros), EvalError);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), EvalError);
}

TEST_CASE("inverse normal cdf") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));

  for (double p : {0.6, 0.9, 0.99})
    CHECK(inverse_normal_cdf(p) == -inverse_normal_cdf(1.0 - p));

  // Accuracy against the bisection oracle, including deep tails.
  for (double p : {1e-9, 1e-7, 1e-5, 1e-4, 0.001, 0.01, 0.025, 0.05, 0.1, 0.2, 0.3,
                   0.4, 0.5, 0.6, 0.75, 0.9, 0.95, 0.975, 0.99, 0.999, 0.99999,
                   0.9999999}) {
    CHECK(std::abs(inverse_normal_cdf(p) - quantile_oracle(p)) < 1e-9);
  }

  CHECK_THROWS_AS(inverse_normal_cdf(0.0), EvalError);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), EvalError);
  CHECK_THROWS_AS(inverse_normal_cdf(-0.5), EvalError);
}

TEST_CASE("calibration score") {
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  CHECK(calibration_score(zeros, 0.5) == 1.0);
  CHECK(calibration_score(zeros, 0.05) == 1.0);

  // Threshold at q=0.95 is 1.959964; only |z|=2.0 falls outside.
  const std::vector<double> z = {0.1, -2.0, 0.5, 1.0};
  CHECK(calibration_score(z, 0.95) == 0.75);

  CHECK_THROWS_AS(calibration_score(z, 0.0), EvalError);
  CHECK_THROWS_AS(calibration_score(z, 1.0), EvalError);
  CHECK_THROWS_AS(calibration_score(std::vector<double>{}, 0.5), EvalError);
}

TEST_CASE("calibration score on seeded normal draws") {
  std::mt19937_64 rng(12345);
  std::vector<double> z(10000);
  for (double& v : z) v = ts::standard_normal(rng);
  const double c = calibration_score(z, 0.5);
  CHECK(c > 0.48);
  CHECK(c < 0.52);
}

TEST_CASE("calibration curve properties") {
  std::mt19937_64 rng(777);
  std::vector<double> z(2000);
  for (double& v : z) v = ts::standard_normal(rng);

  const auto grid = default_quantile_grid();
  REQUIRE(grid.size() == 19);
  CHECK(grid.front() == doctest::Approx(0.05));
  CHECK(grid.back() == doctest::Approx(0.95));

  const CalibrationCurve curve = calibration_curve(z, grid);
  for (std::size_t i = 1; i < curve.scores.size(); ++i)
    CHECK(curve.scores[i] >= curve.scores[i - 1]);  // larger intervals catch more

  // Permutation invariance.
  std::vector<double> shuffled = z;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[rng() % (i + 1)]);
  const CalibrationCurve curve2 = calibration_curve(shuffled, grid);
  CHECK(curve.scores == curve2.scores);

  // Inflated uncertainties push every score up; deflated push them down.
  std::vector<double> under(z), over(z);
  for (double& v : under) v /= 10.0;  // sigma inflated tenfold
  for (double& v : over) v *= 10.0;
  const CalibrationCurve cu = calibration_curve(under, grid);
  const CalibrationCurve co = calibration_curve(over, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(cu.scores[i] >= grid[i]);
    CHECK(co.scores[i] <= grid[i]);
  }

  const std::vector<double> bad_grid = {0.2, 0.1};
  CHECK_THROWS_AS(calibration_curve(z, bad_grid), EvalError);
  const std::vector<double> out_of_range = {0.5, 1.0};
  CHECK_THROWS_AS(calibration_curve(z, out_of_range), EvalError);
}

TEST_CASE("benchmark retains predictions that reproduce the stored rmse") {
  const auto corpus = ts::synthetic_corpus(40, 4040);
  const auto fps = ts::corpus_fingerprints(corpus, FingerprintConfig{1024, 2});
  std::mt19937_64 rng(11);
  std::vector<double> y(fps.size());
  for (double& v : y) v = ts::standard_normal(rng);

  SplitSpec split_spec;
  split_spec.train_fraction = 0.8;
  split_spec.n_repeats = 4;
  split_spec.seed = 3;

  ModelSpec model_spec;
  model_spec.family = KernelFamily::Tanimoto;
  model_spec.kernel_init = TanimotoConfig{1.0};
  model_spec.noise_init = NoiseConfig{0.1, 1e-6};
  model_spec.optimize = false;  // fixed hyperparameters keep this test fast

  const BenchmarkResult result = run_benchmark(Inputs{fps}, y, split_spec, model_spec);
  REQUIRE(result.splits.size() == 4);

  double mean = 0.0;
  for (const auto& s : result.splits) {
    std::vector<double> means;
    for (const auto& p : s.predictions) means.push_back(p.mean);
    CHECK(rmse(means, s.truths) == doctest::Approx(s.rmse).epsilon(1e-12));
    for (const auto& p : s.predictions) CHECK(p.std > 0.0);
    mean += s.rmse;
  }
  mean /= 4.0;
  CHECK(result.rmse_mean == doctest::Approx(mean).epsilon(1e-12));
  double var = 0.0;
  for (const auto& s : result.splits) var += (s.rmse - mean) * (s.rmse - mean);
  CHECK(result.rmse_std == doctest::Approx(std::sqrt(var / 3.0)).epsilon(1e-12));

  // Byte-stable rerun.
  const BenchmarkResult rerun = run_benchmark(Inputs{fps}, y, split_spec, model_spec);
  for (std::size_t s = 0; s < result.splits.size(); ++s) {
    CHECK(result.splits[s].rmse == rerun.splits[s].rmse);
    for (std::size_t i = 0; i < result.splits[s].predictions.size(); ++i) {
      CHECK(result.splits[s].predictions[i].mean == rerun.splits[s].predictions[i].mean);
      CHECK(result.splits[s].predictions[i].std == rerun.splits[s].predictions[i].std);
    }
  }

  // Pooled z-scores and both calibration modes are well formed.
  const auto z = pooled_zscores(result);
  std::size_t total_test = 0;
  for (const auto& s : result.splits) total_test += s.predictions.size();
  CHECK(z.size() == total_test);
  const auto grid = default_quantile_grid();
  const CalibrationCurve pooled =
      benchmark_calibration(result, grid, CalibrationPooling::Pooled);
  const CalibrationCurve averaged =
      benchmark_calibration(result, grid, CalibrationPooling::PerSplitAverage);
  CHECK(pooled.scores.size() == grid.size());
  CHECK(averaged.scores.size() == grid.size());
  for (double s : averaged.scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_SUITE_END();
