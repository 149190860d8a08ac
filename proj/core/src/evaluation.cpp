#include "molgp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "molgp/parallel.hpp"

namespace molgp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Hand-rolled Fisher-Yates: std::shuffle's draw sequence is
// implementation-defined, and split determinism must not depend on the
// standard library build.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(idx[i], idx[j]);
  }
}

}  // namespace

std::vector<IndexSplit> split(std::size_t dataset_size, const SplitSpec& spec) {
  if (dataset_size < 10)
    throw EvalError(EvalError::Kind::DatasetTooSmall,
                    "need at least 10 examples, got " + std::to_string(dataset_size));
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  if (spec.n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");

  std::size_t n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(dataset_size)));
  n_train = std::clamp<std::size_t>(n_train, 1, dataset_size - 1);

  std::vector<IndexSplit> out;
  out.reserve(static_cast<std::size_t>(spec.n_repeats));
  for (int r = 0; r < spec.n_repeats; ++r) {
    std::vector<std::size_t> idx(dataset_size);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(splitmix64(spec.seed ^ (0x9E3779B97F4A7C15ULL *
                                                static_cast<std::uint64_t>(r + 1))));
    shuffle_indices(idx, rng);
    IndexSplit s;
    s.first.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
    s.second.assign(idx.begin() + static_cast<long>(n_train), idx.end());
    out.push_back(std::move(s));
  }
  return out;
}

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw EvalError(EvalError::Kind::LengthMismatch,
                    "prediction/truth lengths differ: " +
                        std::to_string(predictions.size()) + " vs " +
                        std::to_string(truths.size()));
  if (predictions.empty())
    throw EvalError(EvalError::Kind::EmptyInput, "rmse of empty input");

  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(predictions.size()));
}

// Wichura's PPND16 rational approximation; |relative error| is around 1e-15
// over the full open interval, comfortably inside the 1e-9 contract.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw EvalError(EvalError::Kind::DomainError,
                    "inverse_normal_cdf requires p in (0, 1)");

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

double calibration_score(std::span<const double> residual_zscores, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw EvalError(EvalError::Kind::InvalidQuantile,
                    "quantile must be in (0, 1), got " + std::to_string(q));
  if (residual_zscores.empty())
    throw EvalError(EvalError::Kind::EmptyInput, "calibration_score of empty input");

  const double threshold = inverse_normal_cdf(0.5 * (1.0 + q));
  std::size_t inside = 0;
  for (double z : residual_zscores)
    if (std::abs(z) < threshold) ++inside;  // strict: boundary hits are outside
  return static_cast<double>(inside) / static_cast<double>(residual_zscores.size());
}

CalibrationCurve calibration_curve(std::span<const double> residual_zscores,
                                   std::span<const double> quantile_grid) {
  for (std::size_t i = 0; i < quantile_grid.size(); ++i) {
    if (!(quantile_grid[i] > 0.0 && quantile_grid[i] < 1.0))
      throw EvalError(EvalError::Kind::InvalidQuantile, "grid values must be in (0, 1)");
    if (i > 0 && !(quantile_grid[i] > quantile_grid[i - 1]))
      throw EvalError(EvalError::Kind::InvalidQuantile, "grid must be strictly increasing");
  }

  CalibrationCurve curve;
  curve.quantiles.assign(quantile_grid.begin(), quantile_grid.end());
  curve.scores.reserve(quantile_grid.size());
  for (double q : quantile_grid)
    curve.scores.push_back(calibration_score(residual_zscores, q));
  return curve;
}

std::vector<double> default_quantile_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

BenchmarkResult run_benchmark(const Inputs& inputs, std::span<const double> targets,
                              const SplitSpec& split_spec, const ModelSpec& model_spec) {
  const std::size_t n = input_count(inputs);
  if (n != targets.size())
    throw GpError(GpError::Kind::DimensionMismatch, "inputs/targets length mismatch");

  const std::vector<IndexSplit> splits = split(n, split_spec);

  BenchmarkResult result;
  result.splits.resize(splits.size());

  parallel_for(splits.size(), [&](std::size_t s) {
    const auto& [train_idx, test_idx] = splits[s];

    const Inputs train_in = input_subset(inputs, train_idx);
    const Inputs test_in = input_subset(inputs, test_idx);
    std::vector<double> train_y, test_y;
    for (std::size_t i : train_idx) train_y.push_back(targets[i]);
    for (std::size_t i : test_idx) test_y.push_back(targets[i]);

    KernelConfig kcfg = model_spec.kernel_init;
    NoiseConfig ncfg = model_spec.noise_init;
    if (model_spec.optimize) {
      OptBudget budget = model_spec.budget;
      budget.seed = splitmix64(model_spec.budget.seed ^
                               (0xD1B54A32D192ED03ULL * (s + 1)));
      const OptResult opt =
          optimize_hyperparameters(train_in, train_y, model_spec.family, kcfg, ncfg,
                                   budget, model_spec.fix_noise);
      kcfg = opt.kernel;
      ncfg = opt.noise;
    }

    const GpModel model = fit(train_in, train_y, kcfg, ncfg);
    SplitOutcome& outcome = result.splits[s];
    outcome.predictions = model.predict(test_in);
    outcome.test_indices = test_idx;
    outcome.truths = test_y;
    outcome.kernel = kcfg;
    outcome.noise = ncfg;
    outcome.lml = model.log_marginal_likelihood();

    std::vector<double> means;
    means.reserve(outcome.predictions.size());
    for (const auto& p : outcome.predictions) means.push_back(p.mean);
    outcome.rmse = rmse(means, test_y);
  });

  double mean = 0.0;
  for (const auto& s : result.splits) mean += s.rmse;
  mean /= static_cast<double>(result.splits.size());
  double var = 0.0;
  for (const auto& s : result.splits) var += (s.rmse - mean) * (s.rmse - mean);
  result.rmse_mean = mean;
  result.rmse_std = result.splits.size() > 1
                        ? std::sqrt(var / static_cast<double>(result.splits.size() - 1))
                        : 0.0;
  return result;
}

std::vector<double> pooled_zscores(const BenchmarkResult& result) {
  std::vector<double> z;
  for (const auto& s : result.splits)
    for (std::size_t i = 0; i < s.predictions.size(); ++i)
      z.push_back((s.predictions[i].mean - s.truths[i]) / s.predictions[i].std);
  return z;
}

CalibrationCurve benchmark_calibration(const BenchmarkResult& result,
                                       std::span<const double> quantile_grid,
                                       CalibrationPooling pooling) {
  if (pooling == CalibrationPooling::Pooled)
    return calibration_curve(pooled_zscores(result), quantile_grid);

  CalibrationCurve avg;
  avg.quantiles.assign(quantile_grid.begin(), quantile_grid.end());
  avg.scores.assign(quantile_grid.size(), 0.0);
  for (const auto& s : result.splits) {
    std::vector<double> z;
    for (std::size_t i = 0; i < s.predictions.size(); ++i)
      z.push_back((s.predictions[i].mean - s.truths[i]) / s.predictions[i].std);
    const CalibrationCurve c = calibration_curve(z, quantile_grid);
    for (std::size_t i = 0; i < c.scores.size(); ++i) avg.scores[i] += c.scores[i];
  }
  for (double& v : avg.scores) v /= static_cast<double>(result.splits.size());
  return avg;
}

}  // namespace molgp
