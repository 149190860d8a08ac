#ifndef MOLGP_FINGERPRINT_HPP
#define MOLGP_FINGERPRINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "molgp/errors.hpp"
#include "molgp/smiles.hpp"

namespace molgp {

struct FingerprintConfig {
  int n_bits = 2048;  // >= 64 and a power of two
  int radius = 3;

  void validate() const;  // throws FingerprintError::BadConfig
};

// Fixed-width binary fingerprint with a cached popcount.
class Fingerprint {
 public:
  Fingerprint() = default;
  explicit Fingerprint(int n_bits);

  int n_bits() const { return n_bits_; }
  int popcount() const { return popcount_; }
  bool test(int bit) const;
  void set(int bit);

  // Lowercase hex, n_bits/4 characters; character j encodes bits
  // [4j, 4j+3] with bit 4j as the least significant bit of the nibble.
  std::string to_hex() const;
  static Fingerprint from_hex(const std::string& hex);

  bool operator==(const Fingerprint& other) const {
    return n_bits_ == other.n_bits_ && words_ == other.words_;
  }

  friend int intersection_popcount(const Fingerprint& a, const Fingerprint& b);

 private:
  std::vector<std::uint64_t> words_;
  int n_bits_ = 0;
  int popcount_ = 0;
};

// Number of bits set in both fingerprints. Throws WidthMismatch via callers;
// here widths must already agree.
int intersection_popcount(const Fingerprint& a, const Fingerprint& b);

// One surviving identifier of the iterative procedure, with the atom set its
// environment covers. Exposed for tests and debugging.
struct EnvironmentId {
  int iteration;
  std::uint64_t id;
  std::vector<int> atom_set;  // sorted atom indices
};

// 64-bit identifier of an atom's local environment: FNV-1a over the tuple
// (atomic number, degree, H count, formal charge, aromatic, in-ring).
std::uint64_t atom_invariant(const Molecule& m, int atom_index);

// Identifiers that survive duplicate removal, before folding into bits.
// Iterations run 0..radius; at iteration r > 0 each atom's identifier is
// rehashed from (r, own previous id, sorted (bond code, neighbor previous id)
// pairs). An identifier is dropped when its covered atom set was already
// produced at an equal or earlier iteration; ties within an iteration keep
// the numerically smallest identifier.
std::vector<EnvironmentId> fingerprint_identifiers(const Molecule& m,
                                                   const FingerprintConfig& cfg);

// Folds the surviving identifiers into a bit vector (id mod n_bits).
Fingerprint fingerprint(const Molecule& m, const FingerprintConfig& cfg);

// Elementwise fingerprint; members may be evaluated in parallel, results are
// order-preserving. Propagates the first error with its molecule index.
std::vector<Fingerprint> fingerprint_batch(const std::vector<Molecule>& ms,
                                           const FingerprintConfig& cfg);

// Reads one hex-encoded fingerprint per line; every line must have exactly
// n_bits/4 hex characters.
std::vector<Fingerprint> read_hex_fingerprints(const std::string& path, int n_bits);

}  // namespace molgp

#endif
