#include "molgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "molgp/parallel.hpp"

namespace molgp {

namespace {

void validate(const TanimotoConfig& cfg) {
  if (!(cfg.signal_variance > 0.0))
    throw std::invalid_argument("tanimoto signal_variance must be > 0");
}

void validate(const SskConfig& cfg) {
  if (!(cfg.match_decay > 0.0 && cfg.match_decay <= 1.0))
    throw std::invalid_argument("ssk match_decay must be in (0, 1]");
  if (!(cfg.gap_decay > 0.0 && cfg.gap_decay <= 1.0))
    throw std::invalid_argument("ssk gap_decay must be in (0, 1]");
  if (cfg.max_subsequence_length < 1)
    throw std::invalid_argument("ssk max_subsequence_length must be >= 1");
  if (!(cfg.signal_variance > 0.0))
    throw std::invalid_argument("ssk signal_variance must be > 0");
}

using IdSeq = std::vector<std::int32_t>;

// Maps symbol strings to dense ids so the DP compares integers.
std::vector<IdSeq> intern(const std::vector<const SymbolSeq*>& seqs) {
  std::unordered_map<std::string, std::int32_t> table;
  std::vector<IdSeq> out;
  out.reserve(seqs.size());
  for (const SymbolSeq* s : seqs) {
    IdSeq ids;
    ids.reserve(s->size());
    for (const Symbol& sym : *s) {
      auto [it, inserted] =
          table.insert({sym, static_cast<std::int32_t>(table.size())});
      ids.push_back(it->second);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

// Unnormalized gap-weighted subsequence kernel via two rolling tables:
//   M_l(i,j) = [s_i == t_j] * lm^2 * A_{l-1}(i-1, j-1)
//   A_l(i,j) = lg * A_l(i-1,j) + R,   R = lg * R + M_l(i,j)  (per-row scan)
// where A is the lg-decayed 2-D prefix sum of M. All terms are nonnegative.
double ssk_dp(const IdSeq& s, const IdSeq& t, double lm, double lg, int n,
              bool sum_all) {
  const std::size_t ns = s.size();
  const std::size_t nt = t.size();
  const double lm2 = lm * lm;

  thread_local std::vector<double> m1, mprev, a;
  m1.assign(ns * nt, 0.0);
  double level_total = 0.0;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (s[i] == t[j]) {
        m1[i * nt + j] = lm2;
        level_total += lm2;
      }

  double total = (sum_all || n == 1) ? level_total : 0.0;
  if (n == 1) return total;

  mprev = m1;
  a.assign(ns * nt, 0.0);

  for (int l = 2; l <= n; ++l) {
    // Decayed prefix sum of the previous level.
    for (std::size_t i = 0; i < ns; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < nt; ++j) {
        row = lg * row + mprev[i * nt + j];
        a[i * nt + j] = (i > 0 ? lg * a[(i - 1) * nt + j] : 0.0) + row;
      }
    }

    level_total = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t j = 0; j < nt; ++j) {
        double v = 0.0;
        if (i > 0 && j > 0 && m1[i * nt + j] != 0.0)
          v = lm2 * a[(i - 1) * nt + (j - 1)];
        mprev[i * nt + j] = v;
        level_total += v;
      }
    }
    if (sum_all || l == n) total += level_total;
  }
  return total;
}

bool lex_less(const SymbolSeq& a, const SymbolSeq& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void require_nonempty(const SymbolSeq& s, const char* which) {
  if (s.empty())
    throw KernelError(KernelError::Kind::EmptySequence,
                      std::string("ssk: ") + which + " sequence is empty");
}

// Occurrence-weight map for subsequences of exactly length k.
void enumerate_occurrences(const IdSeq& seq, int k, double lm, double lg,
                           std::map<IdSeq, double>& weights) {
  const int n = static_cast<int>(seq.size());
  std::vector<int> idx(static_cast<std::size_t>(k));
  const double lmk = std::pow(lm, k);

  // Depth-first enumeration of strictly increasing index vectors.
  std::function<void(int, int)> rec = [&](int depth, int start) {
    if (depth == k) {
      const int span = idx[static_cast<std::size_t>(k) - 1] - idx[0] + 1;
      IdSeq u(static_cast<std::size_t>(k));
      for (int d = 0; d < k; ++d) u[d] = seq[idx[d]];
      weights[u] += lmk * std::pow(lg, span - k);
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[depth] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
}

double ssk_brute_unnormalized(const IdSeq& s, const IdSeq& t, const SskConfig& cfg) {
  double total = 0.0;
  const int n = cfg.max_subsequence_length;
  for (int k = cfg.sum_all_lengths ? 1 : n; k <= n; ++k) {
    std::map<IdSeq, double> ws, wt;
    enumerate_occurrences(s, k, cfg.match_decay, cfg.gap_decay, ws);
    enumerate_occurrences(t, k, cfg.match_decay, cfg.gap_decay, wt);
    for (const auto& [u, w] : ws) {
      auto it = wt.find(u);
      if (it != wt.end()) total += w * it->second;
    }
  }
  return total;
}

template <typename RawKernel>
double ssk_wrap(const SymbolSeq& s_in, const SymbolSeq& t_in, const SskConfig& cfg,
                RawKernel raw) {
  validate(cfg);
  require_nonempty(s_in, "first");
  require_nonempty(t_in, "second");

  // Canonical argument order makes ssk(x, y) and ssk(y, x) follow the same
  // floating-point path.
  const bool swap = lex_less(t_in, s_in);
  const SymbolSeq& s = swap ? t_in : s_in;
  const SymbolSeq& t = swap ? s_in : t_in;

  const std::vector<IdSeq> ids = intern({&s, &t});

  if (!cfg.normalize) return cfg.signal_variance * raw(ids[0], ids[1]);
  if (s == t) return cfg.signal_variance;

  const double kst = raw(ids[0], ids[1]);
  const double kss = raw(ids[0], ids[0]);
  const double ktt = raw(ids[1], ids[1]);
  return cfg.signal_variance * kst / std::sqrt(kss * ktt);
}

}  // namespace

double tanimoto(const Fingerprint& f, const Fingerprint& g, const TanimotoConfig& cfg) {
  validate(cfg);
  if (f.n_bits() != g.n_bits())
    throw KernelError(KernelError::Kind::WidthMismatch,
                      "tanimoto: fingerprint widths differ (" +
                          std::to_string(f.n_bits()) + " vs " +
                          std::to_string(g.n_bits()) + ")");
  const int pf = f.popcount();
  const int pg = g.popcount();
  if (pf == 0 && pg == 0) {
    warn("tanimoto: both fingerprints are all-zero; returning 0");
    return 0.0;
  }
  const int inter = intersection_popcount(f, g);
  return cfg.signal_variance * static_cast<double>(inter) /
         static_cast<double>(pf + pg - inter);
}

double ssk(const SymbolSeq& s, const SymbolSeq& t, const SskConfig& cfg) {
  return ssk_wrap(s, t, cfg, [&](const IdSeq& a, const IdSeq& b) {
    return ssk_dp(a, b, cfg.match_decay, cfg.gap_decay, cfg.max_subsequence_length,
                  cfg.sum_all_lengths);
  });
}

double ssk_bruteforce(const SymbolSeq& s, const SymbolSeq& t, const SskConfig& cfg) {
  if (s.size() > 10 || t.size() > 10 || cfg.max_subsequence_length > 4)
    throw KernelError(KernelError::Kind::InputTooLarge,
                      "ssk_bruteforce is guarded to |s|,|t| <= 10 and n <= 4");
  return ssk_wrap(s, t, cfg, [&](const IdSeq& a, const IdSeq& b) {
    return ssk_brute_unnormalized(a, b, cfg);
  });
}

std::size_t input_count(const Inputs& inputs) {
  return std::visit([](const auto& v) { return v.size(); }, inputs);
}

Inputs input_subset(const Inputs& inputs, const std::vector<std::size_t>& idx) {
  return std::visit(
      [&](const auto& v) -> Inputs {
        std::decay_t<decltype(v)> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(v.at(i));
        return out;
      },
      inputs);
}

namespace {

GramMatrix gram_tanimoto(const std::vector<Fingerprint>& fps, const TanimotoConfig& cfg) {
  const std::size_t n = fps.size();
  for (std::size_t i = 1; i < n; ++i)
    if (fps[i].n_bits() != fps[0].n_bits()) {
      KernelError e(KernelError::Kind::WidthMismatch,
                    "gram: fingerprint " + std::to_string(i) + " width differs");
      e.row = static_cast<long>(i);
      throw e;
    }

  GramMatrix g;
  g.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = tanimoto(fps[i], fps[j], cfg);
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      g.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return g;
}

GramMatrix gram_ssk(const std::vector<SymbolSeq>& seqs, const SskConfig& cfg) {
  validate(cfg);
  const std::size_t n = seqs.size();
  for (std::size_t i = 0; i < n; ++i)
    if (seqs[i].empty()) {
      KernelError e(KernelError::Kind::EmptySequence,
                    "gram: input " + std::to_string(i) + " is an empty sequence");
      e.row = static_cast<long>(i);
      throw e;
    }

  std::vector<const SymbolSeq*> ptrs(n);
  for (std::size_t i = 0; i < n; ++i) ptrs[i] = &seqs[i];
  const std::vector<IdSeq> ids = intern(ptrs);

  auto raw = [&](std::size_t i, std::size_t j) {
    return ssk_dp(ids[i], ids[j], cfg.match_decay, cfg.gap_decay,
                  cfg.max_subsequence_length, cfg.sum_all_lengths);
  };

  std::vector<double> diag(n);
  parallel_for(n, [&](std::size_t i) { diag[i] = raw(i, i); });

  GramMatrix g;
  g.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double s2 = cfg.signal_variance;
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      double v;
      if (!cfg.normalize) {
        v = s2 * (i == j ? diag[i] : raw(i, j));
      } else if (i == j || seqs[i] == seqs[j]) {
        v = s2;
      } else {
        v = s2 * raw(i, j) / std::sqrt(diag[i] * diag[j]);
      }
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      g.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return g;
}

}  // namespace

GramMatrix gram(const Inputs& inputs, const KernelConfig& cfg) {
  if (input_count(inputs) == 0)
    throw KernelError(KernelError::Kind::EmptySequence, "gram: no inputs");

  if (family_of(cfg) == KernelFamily::Tanimoto) {
    const auto* fps = std::get_if<std::vector<Fingerprint>>(&inputs);
    if (fps == nullptr)
      throw std::invalid_argument("gram: Tanimoto kernel requires fingerprints");
    return gram_tanimoto(*fps, std::get<TanimotoConfig>(cfg));
  }
  const auto* seqs = std::get_if<std::vector<SymbolSeq>>(&inputs);
  if (seqs == nullptr)
    throw std::invalid_argument("gram: string kernel requires symbol sequences");
  return gram_ssk(*seqs, std::get<SskConfig>(cfg));
}

Eigen::MatrixXd cross_gram(const Inputs& train, const Inputs& test,
                           const KernelConfig& cfg) {
  const std::size_t ntr = input_count(train);
  const std::size_t nte = input_count(test);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nte), static_cast<Eigen::Index>(ntr));
  if (nte == 0) return out;

  if (family_of(cfg) == KernelFamily::Tanimoto) {
    const auto& ftr = std::get<std::vector<Fingerprint>>(train);
    const auto& fte = std::get<std::vector<Fingerprint>>(test);
    const auto& tancfg = std::get<TanimotoConfig>(cfg);
    parallel_for(nte, [&](std::size_t i) {
      for (std::size_t j = 0; j < ntr; ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            tanimoto(fte[i], ftr[j], tancfg);
    });
    return out;
  }

  const auto& str = std::get<std::vector<SymbolSeq>>(train);
  const auto& ste = std::get<std::vector<SymbolSeq>>(test);
  const auto& skcfg = std::get<SskConfig>(cfg);
  validate(skcfg);
  for (std::size_t i = 0; i < str.size(); ++i) require_nonempty(str[i], "train");
  for (std::size_t i = 0; i < ste.size(); ++i) require_nonempty(ste[i], "test");

  std::vector<const SymbolSeq*> ptrs;
  ptrs.reserve(ntr + nte);
  for (const auto& s : str) ptrs.push_back(&s);
  for (const auto& s : ste) ptrs.push_back(&s);
  const std::vector<IdSeq> ids = intern(ptrs);

  auto raw = [&](std::size_t i, std::size_t j) {
    return ssk_dp(ids[i], ids[j], skcfg.match_decay, skcfg.gap_decay,
                  skcfg.max_subsequence_length, skcfg.sum_all_lengths);
  };

  std::vector<double> diag(ntr + nte);
  parallel_for(ntr + nte, [&](std::size_t i) { diag[i] = raw(i, i); });

  const double s2 = skcfg.signal_variance;
  parallel_for(nte, [&](std::size_t i) {
    for (std::size_t j = 0; j < ntr; ++j) {
      double v;
      if (!skcfg.normalize) {
        v = s2 * raw(ntr + i, j);
      } else if (ste[i] == str[j]) {
        v = s2;
      } else {
        v = s2 * raw(ntr + i, j) / std::sqrt(diag[ntr + i] * diag[j]);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  });
  return out;
}

double self_kernel(const Inputs& inputs, std::size_t index, const KernelConfig& cfg) {
  if (family_of(cfg) == KernelFamily::Tanimoto) {
    const auto& fps = std::get<std::vector<Fingerprint>>(inputs);
    return tanimoto(fps.at(index), fps.at(index), std::get<TanimotoConfig>(cfg));
  }
  const auto& seqs = std::get<std::vector<SymbolSeq>>(inputs);
  const auto& skcfg = std::get<SskConfig>(cfg);
  if (skcfg.normalize) return skcfg.signal_variance;
  return ssk(seqs.at(index), seqs.at(index), skcfg);
}

}  // namespace molgp
