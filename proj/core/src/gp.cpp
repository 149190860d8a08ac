#include "molgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <utility>

namespace molgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

TargetStats compute_stats(std::span<const double> targets) {
  const double n = static_cast<double>(targets.size());
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= n;
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  var /= n;
  TargetStats stats{mean, std::sqrt(var)};
  if (!(stats.std > 0.0))
    throw GpError(GpError::Kind::ConstantTargets,
                  "targets are constant (or not finite); cannot standardize");
  return stats;
}

Eigen::VectorXd standardize(std::span<const double> targets, const TargetStats& s) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i)
    y(static_cast<Eigen::Index>(i)) = (targets[i] - s.mean) / s.std;
  return y;
}

}  // namespace

void NoiseConfig::validate() const {
  if (!(noise_variance >= 1e-8))
    throw std::invalid_argument("noise_variance must be >= 1e-8");
  if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
}

CoreFit fit_core(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y,
                 const NoiseConfig& noise) {
  noise.validate();
  const Eigen::Index n = gram.rows();
  if (gram.cols() != n || y.size() != n)
    throw GpError(GpError::Kind::DimensionMismatch, "gram/target dimensions disagree");

  double jitters[2] = {noise.jitter, 1e-4};
  const int attempts = noise.jitter < 1e-4 ? 2 : 1;

  Eigen::LLT<Eigen::MatrixXd> llt;
  double used = 0.0;
  bool ok = false;
  for (int a = 0; a < attempts && !ok; ++a) {
    Eigen::MatrixXd A = gram;
    A.diagonal().array() += noise.noise_variance + jitters[a];
    llt.compute(A);
    if (llt.info() == Eigen::Success) {
      used = jitters[a];
      ok = true;
    }
  }
  if (!ok)
    throw GpError(GpError::Kind::CholeskyFailure,
                  "Cholesky factorization failed even with jitter 1e-4");

  CoreFit out;
  out.L = llt.matrixL();
  out.alpha = llt.solve(y);
  out.jitter_applied = used;
  const double half_logdet = out.L.diagonal().array().log().sum();
  out.lml = -0.5 * y.dot(out.alpha) - half_logdet -
            0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return out;
}

GpModel GpModel::assemble(Inputs inputs, std::vector<double> targets,
                          KernelConfig kernel, NoiseConfig noise, TargetStats stats) {
  GpModel m;
  m.inputs_ = std::move(inputs);
  m.targets_ = std::move(targets);
  m.kernel_ = std::move(kernel);
  m.noise_ = noise;
  m.stats_ = stats;

  const GramMatrix g = gram(m.inputs_, m.kernel_);
  const Eigen::VectorXd y = standardize(m.targets_, m.stats_);
  m.core_ = fit_core(g.values, y, m.noise_);
  return m;
}

GpModel fit(const Inputs& inputs, std::span<const double> targets,
            const KernelConfig& kernel, const NoiseConfig& noise) {
  const std::size_t n = input_count(inputs);
  if (n != targets.size())
    throw GpError(GpError::Kind::DimensionMismatch,
                  "got " + std::to_string(n) + " inputs for " +
                      std::to_string(targets.size()) + " targets");
  if (n < 2)
    throw GpError(GpError::Kind::DimensionMismatch, "need at least 2 training points");

  const TargetStats stats = compute_stats(targets);
  return GpModel::assemble(inputs, std::vector<double>(targets.begin(), targets.end()),
                           kernel, noise, stats);
}

std::vector<PredictiveDistribution> GpModel::predict(const Inputs& test_inputs) const {
  if (test_inputs.index() != inputs_.index())
    throw GpError(GpError::Kind::RepresentationMismatch,
                  "test inputs use a different molecular representation than the model");

  const std::size_t nte = input_count(test_inputs);
  std::vector<PredictiveDistribution> out(nte);
  if (nte == 0) return out;

  const Eigen::MatrixXd kx = cross_gram(inputs_, test_inputs, kernel_);  // nte x ntr
  const Eigen::MatrixXd v =
      core_.L.triangularView<Eigen::Lower>().solve(kx.transpose());      // ntr x nte

  for (std::size_t j = 0; j < nte; ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    const double mean_std = kx.row(jj).dot(core_.alpha);
    const double kss = self_kernel(test_inputs, j, kernel_);
    double var = kss - v.col(jj).squaredNorm() + noise_.noise_variance;
    var = std::max(var, 1e-12);
    out[j].mean = mean_std * stats_.std + stats_.mean;
    out[j].std = std::sqrt(var) * stats_.std;
  }
  return out;
}

double log_marginal_likelihood(const Inputs& inputs, std::span<const double> targets,
                               const KernelConfig& kernel, const NoiseConfig& noise) {
  return fit(inputs, targets, kernel, noise).log_marginal_likelihood();
}

// ---------------------------------------------------------------------------
// Hyperparameter optimization
// ---------------------------------------------------------------------------

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Bounded cache of unit-signal Gram matrices keyed by the decay pair, at
// 1e-12 resolution. Restarts frequently revisit boundary values.
class GramCache {
 public:
  explicit GramCache(std::size_t cap) : cap_(cap) {}

  const Eigen::MatrixXd& get(double lm, double lg,
                             const std::function<Eigen::MatrixXd()>& build) {
    const Key key{std::llround(lm * 1e12), std::llround(lg * 1e12)};
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    if (entries_.size() >= cap_) {
      entries_.erase(order_.front());
      order_.pop_front();
    }
    order_.push_back(key);
    return entries_.emplace(key, build()).first->second;
  }

 private:
  using Key = std::pair<long long, long long>;
  std::size_t cap_;
  std::map<Key, Eigen::MatrixXd> entries_;
  std::deque<Key> order_;
};

struct Bounds {
  std::vector<double> lo, hi;
};

// Simple Nelder-Mead with projection onto box bounds. Minimizes f.
class NelderMead {
 public:
  NelderMead(Bounds bounds, int max_evals) : bounds_(std::move(bounds)), budget_(max_evals) {}

  void minimize(const std::function<double(const std::vector<double>&)>& f,
                std::vector<double> x0, const std::vector<double>& steps) {
    const std::size_t d = x0.size();
    project(x0);

    std::vector<std::vector<double>> xs;
    std::vector<double> fs;
    xs.push_back(x0);
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> xi = x0;
      xi[i] += (xi[i] + steps[i] <= bounds_.hi[i]) ? steps[i] : -steps[i];
      project(xi);
      xs.push_back(xi);
    }
    for (auto& x : xs) {
      if (evals_ >= budget_) return;
      fs.push_back(eval(f, x));
    }

    while (evals_ < budget_) {
      // Order vertices: best first.
      std::vector<std::size_t> idx(xs.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
      reorder(xs, fs, idx);

      const double fbest = fs.front();
      const double fworst = fs.back();
      const double fsecond = fs[fs.size() - 2];

      // Convergence on both function spread and simplex size.
      double spread = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double w = 0.0;
        for (const auto& x : xs) w = std::max(w, std::abs(x[i] - xs[0][i]));
        spread = std::max(spread, w);
      }
      if (std::isfinite(fbest) && std::isfinite(fworst) &&
          fworst - fbest <= 1e-9 * (1.0 + std::abs(fbest)) && spread <= 1e-7)
        break;

      std::vector<double> centroid(d, 0.0);
      for (std::size_t v = 0; v + 1 < xs.size(); ++v)
        for (std::size_t i = 0; i < d; ++i) centroid[i] += xs[v][i];
      for (double& c : centroid) c /= static_cast<double>(d);

      auto blend = [&](double coeff) {
        std::vector<double> x(d);
        for (std::size_t i = 0; i < d; ++i)
          x[i] = centroid[i] + coeff * (xs.back()[i] - centroid[i]);
        project(x);
        return x;
      };

      std::vector<double> xr = blend(-1.0);  // reflection
      if (evals_ >= budget_) break;
      const double fr = eval(f, xr);

      if (fr < fbest) {
        std::vector<double> xe = blend(-2.0);  // expansion
        if (evals_ >= budget_) {
          replace_worst(xs, fs, xr, fr);
          break;
        }
        const double fe = eval(f, xe);
        if (fe < fr) replace_worst(xs, fs, xe, fe);
        else replace_worst(xs, fs, xr, fr);
      } else if (fr < fsecond) {
        replace_worst(xs, fs, xr, fr);
      } else {
        const bool outside = fr < fworst;
        std::vector<double> xc = blend(outside ? -0.5 : 0.5);
        if (evals_ >= budget_) break;
        const double fc = eval(f, xc);
        if ((outside && fc <= fr) || (!outside && fc < fworst)) {
          replace_worst(xs, fs, xc, fc);
        } else {
          // Shrink toward the best vertex.
          for (std::size_t v = 1; v < xs.size(); ++v) {
            for (std::size_t i = 0; i < d; ++i)
              xs[v][i] = xs[0][i] + 0.5 * (xs[v][i] - xs[0][i]);
            project(xs[v]);
            if (evals_ >= budget_) return;
            fs[v] = eval(f, xs[v]);
          }
        }
      }
    }
  }

 private:
  void project(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::clamp(x[i], bounds_.lo[i], bounds_.hi[i]);
  }

  double eval(const std::function<double(const std::vector<double>&)>& f,
              const std::vector<double>& x) {
    ++evals_;
    return f(x);
  }

  static void reorder(std::vector<std::vector<double>>& xs, std::vector<double>& fs,
                      const std::vector<std::size_t>& idx) {
    std::vector<std::vector<double>> nx;
    std::vector<double> nf;
    for (std::size_t i : idx) {
      nx.push_back(xs[i]);
      nf.push_back(fs[i]);
    }
    xs = std::move(nx);
    fs = std::move(nf);
  }

  static void replace_worst(std::vector<std::vector<double>>& xs, std::vector<double>& fs,
                            const std::vector<double>& x, double f) {
    xs.back() = x;
    fs.back() = f;
  }

  Bounds bounds_;
  int budget_;
  int evals_ = 0;
};

}  // namespace

OptResult optimize_hyperparameters(const Inputs& inputs, std::span<const double> targets,
                                   KernelFamily family, const KernelConfig& kernel_init,
                                   const NoiseConfig& noise_init, const OptBudget& budget,
                                   bool fix_noise) {
  if (family_of(kernel_init) != family)
    throw std::invalid_argument("kernel_init does not match the requested family");
  noise_init.validate();
  const std::size_t n = input_count(inputs);
  if (n != targets.size() || n < 2)
    throw GpError(GpError::Kind::DimensionMismatch, "need >= 2 inputs matching targets");

  const TargetStats stats = compute_stats(targets);
  const Eigen::VectorXd y = standardize(targets, stats);

  const bool is_ssk = family == KernelFamily::Ssk;
  const SskConfig ssk0 = is_ssk ? std::get<SskConfig>(kernel_init) : SskConfig{};
  const TanimotoConfig tan0 =
      is_ssk ? TanimotoConfig{} : std::get<TanimotoConfig>(kernel_init);

  // Parameter layout: log s2 [, log noise] [, log lm, log lg]
  const std::size_t dim = 1 + (fix_noise ? 0 : 1) + (is_ssk ? 2 : 0);
  const double log_lambda_lo = std::log(0.01);

  Bounds bounds;
  bounds.lo = {std::log(1e-6)};
  bounds.hi = {std::log(1e6)};
  if (!fix_noise) {
    bounds.lo.push_back(std::log(1e-8));
    bounds.hi.push_back(std::log(1e3));
  }
  if (is_ssk) {
    bounds.lo.insert(bounds.lo.end(), {log_lambda_lo, log_lambda_lo});
    bounds.hi.insert(bounds.hi.end(), {0.0, 0.0});
  }

  // Base Gram at unit signal variance: fixed for the Tanimoto kernel, cached
  // per decay pair for the string kernel.
  Eigen::MatrixXd tanimoto_base;
  if (!is_ssk) {
    TanimotoConfig unit = tan0;
    unit.signal_variance = 1.0;
    tanimoto_base = gram(inputs, KernelConfig{unit}).values;
  }
  GramCache cache(16);

  auto configs_from = [&](const std::vector<double>& x) {
    std::size_t p = 0;
    const double s2 = std::exp(x[p++]);
    NoiseConfig nc = noise_init;
    if (!fix_noise) nc.noise_variance = std::max(std::exp(x[p++]), 1e-8);
    KernelConfig kc;
    if (is_ssk) {
      SskConfig c = ssk0;
      c.signal_variance = s2;
      c.match_decay = std::min(std::exp(x[p]), 1.0);
      c.gap_decay = std::min(std::exp(x[p + 1]), 1.0);
      kc = c;
    } else {
      TanimotoConfig c = tan0;
      c.signal_variance = s2;
      kc = c;
    }
    return std::make_pair(kc, nc);
  };

  OptResult result;
  result.best_lml = kNegInf;
  bool have_best = false;

  auto objective = [&](const std::vector<double>& x) -> double {
    auto [kc, nc] = configs_from(x);
    double lml = kNegInf;
    try {
      const Eigen::MatrixXd* base = nullptr;
      double s2;
      if (is_ssk) {
        const SskConfig& c = std::get<SskConfig>(kc);
        s2 = c.signal_variance;
        base = &cache.get(c.match_decay, c.gap_decay, [&]() {
          SskConfig unit = c;
          unit.signal_variance = 1.0;
          return gram(inputs, KernelConfig{unit}).values;
        });
      } else {
        s2 = std::get<TanimotoConfig>(kc).signal_variance;
        base = &tanimoto_base;
      }
      const CoreFit f = fit_core(s2 * (*base), y, nc);
      lml = std::isfinite(f.lml) ? f.lml : kNegInf;
    } catch (const GpError&) {
      lml = kNegInf;
    }

    if (!have_best || lml > result.best_lml) {
      have_best = true;
      result.best_lml = lml;
      result.kernel = kc;
      result.noise = nc;
    }
    result.trace.push_back({lml, result.best_lml});
    return -lml;
  };

  std::mt19937_64 rng(budget.seed);
  for (int r = 0; r < std::max(1, budget.restarts); ++r) {
    std::vector<double> x0;
    if (r == 0) {
      const double s2 = is_ssk ? ssk0.signal_variance : tan0.signal_variance;
      x0.push_back(std::log(s2));
      if (!fix_noise) x0.push_back(std::log(noise_init.noise_variance));
      if (is_ssk) {
        x0.push_back(std::log(ssk0.match_decay));
        x0.push_back(std::log(ssk0.gap_decay));
      }
    } else {
      // Fixed seeded draws; four values consumed per restart regardless of
      // the active layout so the stream is stable.
      const double u1 = uniform01(rng), u2 = uniform01(rng);
      const double u3 = uniform01(rng), u4 = uniform01(rng);
      x0.push_back(std::log(0.25) + u1 * (std::log(4.0) - std::log(0.25)));
      if (!fix_noise)
        x0.push_back(std::log(1e-3) + u2 * (std::log(0.5) - std::log(1e-3)));
      if (is_ssk) {
        x0.push_back(std::log(0.2 + u3 * 0.75));
        x0.push_back(std::log(0.2 + u4 * 0.75));
      }
    }

    std::vector<double> steps(dim, 0.7);
    if (is_ssk) {
      steps[dim - 1] = 0.25;
      steps[dim - 2] = 0.25;
    }

    NelderMead nm(bounds, budget.max_evals);
    nm.minimize(objective, x0, steps);
  }

  if (!std::isfinite(result.best_lml))
    throw GpError(GpError::Kind::AllRestartsFailed,
                  "every objective evaluation failed across all restarts");
  return result;
}

}  // namespace molgp
