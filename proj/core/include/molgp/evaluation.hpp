#ifndef MOLGP_EVALUATION_HPP
#define MOLGP_EVALUATION_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "molgp/errors.hpp"
#include "molgp/gp.hpp"

namespace molgp {

struct SplitSpec {
  double train_fraction = 0.9;  // in (0, 1)
  int n_repeats = 20;
  std::uint64_t seed = 0;
};

using IndexSplit = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;

// Deterministic repeated random splits. Each repeat is an independent
// seeded shuffle; train and test indices partition [0, dataset_size) with
// |train| = round(train_fraction * size), clamped so both sides are
// non-empty. Throws DatasetTooSmall for sizes below 10.
std::vector<IndexSplit> split(std::size_t dataset_size, const SplitSpec& spec);

// Root-mean-squared error. Throws LengthMismatch / EmptyInput.
double rmse(std::span<const double> predictions, std::span<const double> truths);

// Inverse of the standard normal CDF (quantile function), absolute error
// below 1e-9 over (0, 1). Throws DomainError outside (0, 1).
double inverse_normal_cdf(double p);

// Fraction of standardized residuals strictly inside the two-sided central
// q-interval of the standard normal: mean of 1(|z| < Phi^-1((1+q)/2)).
// Boundary hits count as outside. Throws InvalidQuantile unless q in (0, 1).
double calibration_score(std::span<const double> residual_zscores, double q);

struct CalibrationCurve {
  std::vector<double> quantiles;
  std::vector<double> scores;
};

// C(q) over a strictly increasing grid in (0, 1).
CalibrationCurve calibration_curve(std::span<const double> residual_zscores,
                                   std::span<const double> quantile_grid);

// The default grid: 0.05, 0.10, ..., 0.95.
std::vector<double> default_quantile_grid();

// ---------------------------------------------------------------------------
// Repeated-split benchmark protocol
// ---------------------------------------------------------------------------

struct ModelSpec {
  KernelFamily family = KernelFamily::Tanimoto;
  KernelConfig kernel_init = TanimotoConfig{};
  NoiseConfig noise_init;
  bool fix_noise = false;
  bool optimize = true;  // hyperparameter search per split
  OptBudget budget;
};

struct SplitOutcome {
  double rmse = 0.0;
  std::vector<std::size_t> test_indices;
  std::vector<double> truths;
  std::vector<PredictiveDistribution> predictions;
  KernelConfig kernel;   // configuration used for this split
  NoiseConfig noise;
  double lml = 0.0;      // training log marginal likelihood
};

struct BenchmarkResult {
  std::vector<SplitOutcome> splits;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;  // sample standard deviation across splits
};

// Runs the protocol: per split, optimize hyperparameters on the training
// fold (seeded deterministically from the split index), fit, predict the
// test fold and record RMSE with the retained predictive distributions.
// Splits may execute in parallel; results are aggregated by split index.
BenchmarkResult run_benchmark(const Inputs& inputs, std::span<const double> targets,
                              const SplitSpec& split_spec, const ModelSpec& model_spec);

enum class CalibrationPooling {
  Pooled,           // pool test residuals across splits, then score
  PerSplitAverage,  // score each split, average the curves
};

// Standardized residuals (mean - truth)/std pooled across all splits.
std::vector<double> pooled_zscores(const BenchmarkResult& result);

CalibrationCurve benchmark_calibration(const BenchmarkResult& result,
                                       std::span<const double> quantile_grid,
                                       CalibrationPooling pooling);

}  // namespace molgp

#endif
