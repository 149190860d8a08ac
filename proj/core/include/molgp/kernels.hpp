#ifndef MOLGP_KERNELS_HPP
#define MOLGP_KERNELS_HPP

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "molgp/errors.hpp"
#include "molgp/fingerprint.hpp"

namespace molgp {

// One element of the string kernel's alphabet: a tokenizer symbol.
using Symbol = std::string;
using SymbolSeq = std::vector<Symbol>;

struct TanimotoConfig {
  double signal_variance = 1.0;  // > 0
};

struct SskConfig {
  double match_decay = 0.8;          // lambda_m in (0, 1]
  double gap_decay = 0.8;            // lambda_g in (0, 1]
  int max_subsequence_length = 5;    // >= 1
  double signal_variance = 1.0;      // > 0
  bool normalize = true;
  // Sum contributions of subsequence lengths 1..n; false uses length n only.
  bool sum_all_lengths = true;
};

using KernelConfig = std::variant<TanimotoConfig, SskConfig>;
enum class KernelFamily { Tanimoto, Ssk };

inline KernelFamily family_of(const KernelConfig& cfg) {
  return std::holds_alternative<TanimotoConfig>(cfg) ? KernelFamily::Tanimoto
                                                     : KernelFamily::Ssk;
}

struct GramMatrix {
  Eigen::MatrixXd values;      // symmetric
  double jitter_applied = 0.0; // 0 here; the GP adds jitter at fit time
};

// sigma^2 * |f & g| / (|f| + |g| - |f & g|). Returns 0 (with a diagnostic
// warning) when both popcounts are zero. Symmetric bit-exactly.
double tanimoto(const Fingerprint& f, const Fingerprint& g, const TanimotoConfig& cfg);

// Gap-weighted subsequence kernel. An occurrence of a subsequence u of
// length i in s is a strictly increasing index vector; it contributes
// lambda_m^i * lambda_g^(span - i) where span = last - first + 1. The
// unnormalized kernel sums, over shared subsequences of length 1..n, the
// product of the occurrence weights in s and t. With cfg.normalize the value
// is sigma^2 * k(s,t)/sqrt(k(s,s) k(t,t)), otherwise sigma^2 * k(s,t).
// Evaluation runs the O(n |s||t|) dynamic program.
double ssk(const SymbolSeq& s, const SymbolSeq& t, const SskConfig& cfg);

// Independent oracle: explicit enumeration of every subsequence occurrence
// pair. Guarded to |s|,|t| <= 10 and n <= 4 (InputTooLarge).
double ssk_bruteforce(const SymbolSeq& s, const SymbolSeq& t, const SskConfig& cfg);

using Inputs = std::variant<std::vector<Fingerprint>, std::vector<SymbolSeq>>;

std::size_t input_count(const Inputs& inputs);
Inputs input_subset(const Inputs& inputs, const std::vector<std::size_t>& idx);

// Gram matrix over one input set. Computes the upper triangle only (pairs in
// parallel) and mirrors it, so values(i,j) == values(j,i) exactly and the
// result is independent of evaluation order.
GramMatrix gram(const Inputs& inputs, const KernelConfig& cfg);

// Rectangular kernel matrix, rows = test, cols = train. Consistent with
// gram() on the concatenated inputs.
Eigen::MatrixXd cross_gram(const Inputs& train, const Inputs& test,
                           const KernelConfig& cfg);

// k(x, x) for one input under cfg; the predictive-variance diagonal term.
double self_kernel(const Inputs& inputs, std::size_t index, const KernelConfig& cfg);

}  // namespace molgp

#endif
