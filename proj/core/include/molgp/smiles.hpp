#ifndef MOLGP_SMILES_HPP
#define MOLGP_SMILES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "molgp/errors.hpp"

namespace molgp {

enum class TokenKind {
  OrganicAtom,
  AromaticAtom,
  BracketAtom,
  Bond,
  BranchOpen,
  BranchClose,
  RingClosure,
  Dot,
};

struct SmilesToken {
  TokenKind kind;
  std::string text;       // exact slice of the source string
  std::size_t position;   // character offset of the first character

  // Ring index for RingClosure tokens: single digit 0-9 or %nn two-digit.
  int ring_index() const;
};

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
  std::string element;                    // element symbol, e.g. "C", "Cl"
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<int> explicit_h_count;    // set only for bracket atoms with an H field
  std::optional<int> isotope;
  bool bracket = false;                   // written as [...] in the source
  int degree = 0;                         // incident bonds, filled after parsing
};

struct Bond {
  int a = 0;  // endpoint atom indices, a < b
  int b = 0;
  BondOrder order = BondOrder::Single;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string source;

  // Indices of atoms bonded to `atom_index`.
  std::vector<int> neighbors(int atom_index) const;
};

// Splits a SMILES string into tokens. Concatenating the token texts in order
// reproduces the input exactly. Throws ParseError (UnknownCharacter,
// UnterminatedBracket, InvalidSyntax) on anything outside the supported
// alphabet: organic-subset atoms (B,C,N,O,S,P,F,Cl,Br,I), aromatic lowercase
// (b,c,n,o,s,p), bracket atoms, bonds - = # : / \, branches, ring closures
// 0-9 and %nn, and '.'.
std::vector<SmilesToken> tokenize(const std::string& smiles);

// Builds the molecular graph. Ring closures bond the opening and closing
// atoms; '.' separates components; the default bond order is Single, or
// Aromatic when both endpoints are aromatic and no explicit symbol is given.
// Stereo markers (/ \ and @ @@ inside brackets) are accepted but carry no
// graph semantics.
Molecule parse(const std::string& smiles);

// Implicit hydrogen count for one atom. Organic-subset atoms use the standard
// valence table (B:3, C:4, N:3, O:2, P:3, S:2, halogens:1) minus the floored
// bond-order sum (aromatic bonds count 1.5), clamped at 0. Bracket atoms
// return their explicit H count (0 if absent).
int implicit_hydrogens(const Molecule& m, int atom_index);

// Atomic number for a supported element symbol, or 0 if unknown.
int atomic_number(const std::string& element);

// True for each atom that lies on a cycle (incident to a non-bridge edge).
std::vector<bool> ring_atoms(const Molecule& m);

// Token texts in order; the symbol alphabet consumed by the string kernel.
// Multi-character symbols are exactly the multi-character tokens: Cl, Br,
// bracket atoms and %nn ring closures.
std::vector<std::string> tokenize_symbols(const std::string& smiles);

}  // namespace molgp

#endif
