#ifndef MOLGP_GP_HPP
#define MOLGP_GP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "molgp/errors.hpp"
#include "molgp/kernels.hpp"

namespace molgp {

struct NoiseConfig {
  double noise_variance = 0.1;  // >= 1e-8; the floor prevents singular systems
  double jitter = 1e-6;         // >= 0

  void validate() const;
};

// Standardization statistics computed on the training targets.
struct TargetStats {
  double mean = 0.0;
  double std = 1.0;  // > 0; constant targets are rejected at fit time
};

// Predictive mean and standard deviation in original target units. The
// standard deviation includes observation noise and is always > 0.
struct PredictiveDistribution {
  double mean = 0.0;
  double std = 0.0;
};

// Cholesky solve against K + (noise + jitter) I. The factorization retries
// once with jitter escalated to 1e-4 before giving up.
struct CoreFit {
  Eigen::MatrixXd L;       // lower-triangular Cholesky factor
  Eigen::VectorXd alpha;   // (K + (noise+jitter) I)^-1 y
  double lml = 0.0;        // -1/2 y'a - sum log L_ii - n/2 log 2pi
  double jitter_applied = 0.0;
};

CoreFit fit_core(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y,
                 const NoiseConfig& noise);

// Trained state: immutable after construction, safe for concurrent predict().
class GpModel {
 public:
  // Builds the model with the given standardization statistics. fit()
  // computes the stats; model loading passes stored ones.
  static GpModel assemble(Inputs inputs, std::vector<double> targets,
                          KernelConfig kernel, NoiseConfig noise, TargetStats stats);

  std::vector<PredictiveDistribution> predict(const Inputs& test_inputs) const;

  const KernelConfig& kernel_config() const { return kernel_; }
  const NoiseConfig& noise() const { return noise_; }
  const TargetStats& target_stats() const { return stats_; }
  const Inputs& train_inputs() const { return inputs_; }
  const std::vector<double>& train_targets() const { return targets_; }
  double log_marginal_likelihood() const { return core_.lml; }
  double jitter_applied() const { return core_.jitter_applied; }
  const Eigen::MatrixXd& cholesky_factor() const { return core_.L; }
  const Eigen::VectorXd& alpha() const { return core_.alpha; }

 private:
  GpModel() = default;

  Inputs inputs_;
  std::vector<double> targets_;
  KernelConfig kernel_;
  NoiseConfig noise_;
  TargetStats stats_;
  CoreFit core_;
};

// Standardizes the targets, builds the Gram matrix and factorizes it.
// Throws DimensionMismatch (|inputs| != |targets| or n < 2), ConstantTargets,
// or CholeskyFailure.
GpModel fit(const Inputs& inputs, std::span<const double> targets,
            const KernelConfig& kernel, const NoiseConfig& noise);

// The fit() objective, exposed standalone for the optimizer.
double log_marginal_likelihood(const Inputs& inputs, std::span<const double> targets,
                               const KernelConfig& kernel, const NoiseConfig& noise);

struct OptBudget {
  int restarts = 3;
  int max_evals = 200;  // objective evaluations per restart
  std::uint64_t seed = 20201104;
};

struct OptStep {
  double value;  // LML at this evaluation (-inf when the fit failed)
  double best;   // best LML seen up to and including this evaluation
};
using OptTrace = std::vector<OptStep>;

struct OptResult {
  KernelConfig kernel;
  NoiseConfig noise;
  OptTrace trace;
  double best_lml = 0.0;
};

// Maximizes the log marginal likelihood over log-transformed parameters with
// a multi-start Nelder-Mead simplex: (sigma^2, noise) for the Tanimoto
// kernel, plus (lambda_m, lambda_g) bounded to (0.01, 1] for the string
// kernel. The subsequence length n is fixed, never optimized. Restart 0
// starts from the supplied configs; later restarts use fixed seeded draws.
// The returned configuration is the best over every evaluated point.
OptResult optimize_hyperparameters(const Inputs& inputs, std::span<const double> targets,
                                   KernelFamily family, const KernelConfig& kernel_init,
                                   const NoiseConfig& noise_init, const OptBudget& budget,
                                   bool fix_noise = false);

}  // namespace molgp

#endif
