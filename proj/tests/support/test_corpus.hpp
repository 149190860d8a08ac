#ifndef MOLGP_TESTS_SUPPORT_TEST_CORPUS_HPP
#define MOLGP_TESTS_SUPPORT_TEST_CORPUS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "molgp/fingerprint.hpp"

namespace molgp::testsupport {

// Hand-picked real molecules covering the grammar: rings, branches, bracket
// atoms, charges, isotopes, stereo markers, disconnected salts.
const std::vector<std::string>& real_smiles();

// Deterministic generator of syntactically valid SMILES strings: weighted
// atom choices, branches, double/triple bonds, aromatic/aliphatic rings and
// occasional bracket atoms.
std::string random_smiles(std::mt19937_64& rng);

// n distinct generated strings, deterministic in seed.
std::vector<std::string> synthetic_corpus(std::size_t n, std::uint64_t seed);

// Parses and fingerprints a corpus.
std::vector<molgp::Fingerprint> corpus_fingerprints(const std::vector<std::string>& smiles,
                                                    const molgp::FingerprintConfig& cfg);

// Uniform in [0, 1) and standard normal draws with a platform-independent
// mapping from the raw engine output.
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

// Sample f ~ N(0, K + jitter I) via Cholesky.
Eigen::VectorXd sample_gp_prior(const Eigen::MatrixXd& kernel_matrix, double jitter,
                                std::mt19937_64& rng);

}  // namespace molgp::testsupport

#endif
