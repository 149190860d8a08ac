#include "molgp/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <utility>

#include "molgp/parallel.hpp"

namespace molgp {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

struct Fnv64 {
  std::uint64_t state = kFnvOffset;

  void byte(std::uint8_t b) {
    state ^= b;
    state *= kFnvPrime;
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
};

std::uint8_t bond_code(BondOrder order) { return static_cast<std::uint8_t>(order); }

std::uint64_t hash_atom_tuple(int atomic_num, int degree, int h_count, int charge,
                              bool aromatic, bool in_ring) {
  Fnv64 h;
  h.u32(static_cast<std::uint32_t>(atomic_num));
  h.u32(static_cast<std::uint32_t>(degree));
  h.u32(static_cast<std::uint32_t>(h_count));
  h.i32(charge);
  h.byte(aromatic ? 1 : 0);
  h.byte(in_ring ? 1 : 0);
  return h.state;
}

}  // namespace

void FingerprintConfig::validate() const {
  if (n_bits < 64 || (n_bits & (n_bits - 1)) != 0)
    throw FingerprintError(FingerprintError::Kind::BadConfig,
                           "n_bits must be >= 64 and a power of two, got " +
                               std::to_string(n_bits));
  if (radius < 0)
    throw FingerprintError(FingerprintError::Kind::BadConfig, "radius must be >= 0");
}

Fingerprint::Fingerprint(int n_bits)
    : words_(static_cast<std::size_t>((n_bits + 63) / 64), 0), n_bits_(n_bits) {}

bool Fingerprint::test(int bit) const {
  return (words_[bit / 64] >> (bit % 64)) & 1ULL;
}

void Fingerprint::set(int bit) {
  std::uint64_t& w = words_[bit / 64];
  const std::uint64_t mask = 1ULL << (bit % 64);
  if (!(w & mask)) {
    w |= mask;
    ++popcount_;
  }
}

std::string Fingerprint::to_hex() const {
  static const char digits[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(n_bits_ / 4), '0');
  for (std::size_t j = 0; j < out.size(); ++j) {
    const int base = static_cast<int>(4 * j);
    int nibble = 0;
    for (int k = 0; k < 4; ++k)
      if (test(base + k)) nibble |= 1 << k;
    out[j] = digits[nibble];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(const std::string& hex) {
  Fingerprint fp(static_cast<int>(hex.size()) * 4);
  for (std::size_t j = 0; j < hex.size(); ++j) {
    const char c = hex[j];
    int nibble;
    if (c >= '0' && c <= '9') nibble = c - '0';
    else if (c >= 'a' && c <= 'f') nibble = 10 + (c - 'a');
    else if (c >= 'A' && c <= 'F') nibble = 10 + (c - 'A');
    else
      throw FingerprintError(FingerprintError::Kind::BadHexLine,
                             std::string("invalid hex character '") + c + "'");
    for (int k = 0; k < 4; ++k)
      if (nibble & (1 << k)) fp.set(static_cast<int>(4 * j) + k);
  }
  return fp;
}

int intersection_popcount(const Fingerprint& a, const Fingerprint& b) {
  int count = 0;
  for (std::size_t w = 0; w < a.words_.size(); ++w)
    count += std::popcount(a.words_[w] & b.words_[w]);
  return count;
}

std::uint64_t atom_invariant(const Molecule& m, int atom_index) {
  const Atom& atom = m.atoms.at(atom_index);
  const std::vector<bool> in_ring = ring_atoms(m);
  // implicit_hydrogens covers both sources: computed H for organic-subset
  // atoms, the explicit H field for bracket atoms.
  return hash_atom_tuple(atomic_number(atom.element), atom.degree,
                         implicit_hydrogens(m, atom_index), atom.formal_charge,
                         atom.aromatic, in_ring[atom_index]);
}

std::vector<EnvironmentId> fingerprint_identifiers(const Molecule& m,
                                                   const FingerprintConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(m.atoms.size());
  if (n == 0)
    throw FingerprintError(FingerprintError::Kind::EmptyMolecule,
                           "cannot fingerprint an empty molecule");

  const std::vector<bool> in_ring = ring_atoms(m);

  // Per-atom neighbor list with bond codes, reused every iteration.
  std::vector<std::vector<std::pair<std::uint8_t, int>>> nbrs(n);
  for (const Bond& b : m.bonds) {
    nbrs[b.a].push_back({bond_code(b.order), b.b});
    nbrs[b.b].push_back({bond_code(b.order), b.a});
  }

  // Iteration 0: hash of the atom invariant tuple (computed inline so that
  // ring_atoms runs once for the whole molecule).
  std::vector<std::uint64_t> ids(n);
  std::vector<std::set<int>> covered(n);
  for (int a = 0; a < n; ++a) {
    ids[a] = hash_atom_tuple(atomic_number(m.atoms[a].element), m.atoms[a].degree,
                             implicit_hydrogens(m, a), m.atoms[a].formal_charge,
                             m.atoms[a].aromatic, in_ring[a]);
    covered[a] = {a};
  }

  struct Candidate {
    int iteration;
    std::uint64_t id;
    std::set<int> atoms;
  };
  std::vector<Candidate> candidates;
  for (int a = 0; a < n; ++a) candidates.push_back({0, ids[a], covered[a]});

  for (int r = 1; r <= cfg.radius; ++r) {
    std::vector<std::uint64_t> next_ids(n);
    std::vector<std::set<int>> next_cov(n);
    for (int a = 0; a < n; ++a) {
      std::vector<std::pair<std::uint8_t, std::uint64_t>> env;
      env.reserve(nbrs[a].size());
      for (const auto& [code, nb] : nbrs[a]) env.push_back({code, ids[nb]});
      std::sort(env.begin(), env.end());

      Fnv64 h;
      h.u32(static_cast<std::uint32_t>(r));
      h.u64(ids[a]);
      for (const auto& [code, nid] : env) {
        h.byte(code);
        h.u64(nid);
      }
      next_ids[a] = h.state;

      next_cov[a] = covered[a];
      for (const auto& [code, nb] : nbrs[a])
        next_cov[a].insert(covered[nb].begin(), covered[nb].end());
    }
    ids = std::move(next_ids);
    covered = std::move(next_cov);
    for (int a = 0; a < n; ++a) candidates.push_back({r, ids[a], covered[a]});
  }

  // Duplicate removal: earliest iteration wins; within an iteration the
  // numerically smallest identifier wins.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) {
                     if (x.iteration != y.iteration) return x.iteration < y.iteration;
                     return x.id < y.id;
                   });

  std::set<std::set<int>> seen;
  std::vector<EnvironmentId> out;
  for (const Candidate& c : candidates) {
    if (!seen.insert(c.atoms).second) continue;
    out.push_back({c.iteration, c.id, std::vector<int>(c.atoms.begin(), c.atoms.end())});
  }
  return out;
}

Fingerprint fingerprint(const Molecule& m, const FingerprintConfig& cfg) {
  const std::vector<EnvironmentId> ids = fingerprint_identifiers(m, cfg);
  Fingerprint fp(cfg.n_bits);
  const std::uint64_t mask = static_cast<std::uint64_t>(cfg.n_bits) - 1;
  for (const EnvironmentId& e : ids) fp.set(static_cast<int>(e.id & mask));
  return fp;
}

std::vector<Fingerprint> fingerprint_batch(const std::vector<Molecule>& ms,
                                           const FingerprintConfig& cfg) {
  cfg.validate();
  std::vector<Fingerprint> out(ms.size());
  parallel_for(ms.size(), [&](std::size_t i) {
    try {
      out[i] = fingerprint(ms[i], cfg);
    } catch (const FingerprintError& e) {
      FingerprintError tagged(e.kind, std::string(e.what()) + " (molecule " +
                                          std::to_string(i) + ")");
      tagged.index = static_cast<long>(i);
      throw tagged;
    }
  });
  return out;
}

std::vector<Fingerprint> read_hex_fingerprints(const std::string& path, int n_bits) {
  std::ifstream in(path);
  if (!in)
    throw DataError(DataError::Kind::FileNotFound, "cannot open fingerprint file: " + path);

  const std::size_t expect = static_cast<std::size_t>(n_bits / 4);
  std::vector<Fingerprint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.size() != expect)
      throw FingerprintError(FingerprintError::Kind::BadHexLine,
                             "line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(expect) + " hex characters, got " +
                                 std::to_string(line.size()));
    out.push_back(Fingerprint::from_hex(line));
  }
  return out;
}

}  // namespace molgp
