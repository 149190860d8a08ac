#include "molgp/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

namespace molgp {

namespace {

const std::unordered_map<std::string, int>& element_table() {
  static const std::unordered_map<std::string, int> table = {
      {"H", 1},    {"He", 2},   {"Li", 3},   {"Be", 4},   {"B", 5},    {"C", 6},
      {"N", 7},    {"O", 8},    {"F", 9},    {"Ne", 10},  {"Na", 11},  {"Mg", 12},
      {"Al", 13},  {"Si", 14},  {"P", 15},   {"S", 16},   {"Cl", 17},  {"Ar", 18},
      {"K", 19},   {"Ca", 20},  {"Sc", 21},  {"Ti", 22},  {"V", 23},   {"Cr", 24},
      {"Mn", 25},  {"Fe", 26},  {"Co", 27},  {"Ni", 28},  {"Cu", 29},  {"Zn", 30},
      {"Ga", 31},  {"Ge", 32},  {"As", 33},  {"Se", 34},  {"Br", 35},  {"Kr", 36},
      {"Rb", 37},  {"Sr", 38},  {"Y", 39},   {"Zr", 40},  {"Nb", 41},  {"Mo", 42},
      {"Tc", 43},  {"Ru", 44},  {"Rh", 45},  {"Pd", 46},  {"Ag", 47},  {"Cd", 48},
      {"In", 49},  {"Sn", 50},  {"Sb", 51},  {"Te", 52},  {"I", 53},   {"Xe", 54},
      {"Cs", 55},  {"Ba", 56},  {"La", 57},  {"Ce", 58},  {"Pr", 59},  {"Nd", 60},
      {"Pm", 61},  {"Sm", 62},  {"Eu", 63},  {"Gd", 64},  {"Tb", 65},  {"Dy", 66},
      {"Ho", 67},  {"Er", 68},  {"Tm", 69},  {"Yb", 70},  {"Lu", 71},  {"Hf", 72},
      {"Ta", 73},  {"W", 74},   {"Re", 75},  {"Os", 76},  {"Ir", 77},  {"Pt", 78},
      {"Au", 79},  {"Hg", 80},  {"Tl", 81},  {"Pb", 82},  {"Bi", 83},  {"Po", 84},
      {"At", 85},  {"Rn", 86},  {"Fr", 87},  {"Ra", 88},  {"Ac", 89},  {"Th", 90},
      {"Pa", 91},  {"U", 92},   {"Np", 93},  {"Pu", 94},  {"Am", 95},  {"Cm", 96},
      {"Bk", 97},  {"Cf", 98},  {"Es", 99},  {"Fm", 100}, {"Md", 101}, {"No", 102},
      {"Lr", 103}, {"Rf", 104}, {"Db", 105}, {"Sg", 106}, {"Bh", 107}, {"Hs", 108},
      {"Mt", 109}, {"Ds", 110}, {"Rg", 111}, {"Cn", 112}, {"Nh", 113}, {"Fl", 114},
      {"Mc", 115}, {"Lv", 116}, {"Ts", 117}, {"Og", 118},
  };
  return table;
}

bool is_organic_single(char c) {
  return c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'S' || c == 'P' ||
         c == 'F' || c == 'I';
}

bool is_aromatic_organic(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 's' || c == 'p';
}

bool is_bond_char(char c) {
  return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\';
}

[[noreturn]] void fail(ParseError::Kind kind, std::size_t pos, const std::string& msg,
                       int ring_index = -1) {
  ParseError e(kind, pos, msg + " (position " + std::to_string(pos) + ")");
  e.ring_index = ring_index;
  throw e;
}

// Fields extracted from a [...] token.
struct BracketFields {
  std::string element;
  bool aromatic = false;
  int charge = 0;
  int h_count = 0;
  bool has_h = false;
  std::optional<int> isotope;
};

// Grammar: '[' isotope? symbol chiral? hcount? charge? ']' where chiral is
// '@' or '@@' (preserved, no semantics).
BracketFields parse_bracket(const std::string& text, std::size_t pos) {
  BracketFields out;
  std::size_t i = 1;                       // skip '['
  const std::size_t end = text.size() - 1; // index of ']'

  auto bad = [&](const std::string& why) {
    fail(ParseError::Kind::InvalidBracketAtom, pos, "invalid bracket atom '" + text + "': " + why);
  };

  std::size_t digits_start = i;
  while (i < end && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i > digits_start) {
    if (i - digits_start > 3) bad("isotope too long");
    int iso = std::stoi(text.substr(digits_start, i - digits_start));
    if (iso <= 0) bad("isotope must be positive");
    out.isotope = iso;
  }

  if (i >= end) bad("missing element symbol");
  char c = text[i];
  if (std::isupper(static_cast<unsigned char>(c))) {
    std::string sym(1, c);
    if (i + 1 < end && std::islower(static_cast<unsigned char>(text[i + 1]))) {
      std::string two = sym + text[i + 1];
      if (element_table().count(two)) {
        sym = two;
        ++i;
      }
    }
    if (!element_table().count(sym)) bad("unknown element '" + sym + "'");
    out.element = sym;
    ++i;
  } else if (std::islower(static_cast<unsigned char>(c))) {
    // Aromatic bracket symbols: c n o s p b plus the two-letter se/as/te.
    std::string sym(1, c);
    if (i + 1 < end) {
      std::string two = sym + text[i + 1];
      if (two == "se" || two == "as" || two == "te") {
        sym = two;
        ++i;
      }
    }
    static const std::set<std::string> aromatic_ok = {"b", "c", "n", "o",
                                                      "s", "p", "se", "as", "te"};
    if (!aromatic_ok.count(sym)) bad("unknown aromatic symbol '" + sym + "'");
    out.aromatic = true;
    out.element = sym;
    out.element[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sym[0])));
    ++i;
  } else {
    bad("expected element symbol");
  }

  if (i < end && text[i] == '@') {
    ++i;
    if (i < end && text[i] == '@') ++i;
  }

  if (i < end && text[i] == 'H') {
    ++i;
    out.has_h = true;
    out.h_count = 1;
    std::size_t hd = i;
    while (i < end && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i > hd) out.h_count = std::stoi(text.substr(hd, i - hd));
  }

  if (i < end && (text[i] == '+' || text[i] == '-')) {
    const char sign_c = text[i];
    const int sign = sign_c == '+' ? 1 : -1;
    ++i;
    int magnitude = 1;
    if (i < end && std::isdigit(static_cast<unsigned char>(text[i]))) {
      std::size_t cd = i;
      while (i < end && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      magnitude = std::stoi(text.substr(cd, i - cd));
    } else {
      while (i < end && text[i] == sign_c) {
        ++magnitude;
        ++i;
      }
    }
    out.charge = sign * magnitude;
  }

  if (i != end) bad("trailing characters");
  return out;
}

int default_valence(const std::string& element) {
  if (element == "B") return 3;
  if (element == "C") return 4;
  if (element == "N") return 3;
  if (element == "O") return 2;
  if (element == "P") return 3;
  if (element == "S") return 2;
  if (element == "F" || element == "Cl" || element == "Br" || element == "I") return 1;
  return 0;
}

}  // namespace

int SmilesToken::ring_index() const {
  if (text.size() == 1) return text[0] - '0';
  return std::stoi(text.substr(1));  // "%nn"
}

std::vector<SmilesToken> tokenize(const std::string& smiles) {
  if (smiles.empty())
    fail(ParseError::Kind::InvalidSyntax, 0, "empty SMILES string");

  std::vector<SmilesToken> tokens;
  std::size_t i = 0;
  const std::size_t n = smiles.size();

  while (i < n) {
    const char c = smiles[i];
    if (static_cast<unsigned char>(c) >= 0x80)
      fail(ParseError::Kind::UnknownCharacter, i, "non-ASCII byte");

    if (c == '[') {
      std::size_t close = smiles.find(']', i);
      if (close == std::string::npos)
        fail(ParseError::Kind::UnterminatedBracket, i, "'[' without matching ']'");
      tokens.push_back({TokenKind::BracketAtom, smiles.substr(i, close - i + 1), i});
      i = close + 1;
    } else if (c == 'C' && i + 1 < n && smiles[i + 1] == 'l') {
      tokens.push_back({TokenKind::OrganicAtom, "Cl", i});
      i += 2;
    } else if (c == 'B' && i + 1 < n && smiles[i + 1] == 'r') {
      tokens.push_back({TokenKind::OrganicAtom, "Br", i});
      i += 2;
    } else if (is_organic_single(c)) {
      tokens.push_back({TokenKind::OrganicAtom, std::string(1, c), i});
      ++i;
    } else if (is_aromatic_organic(c)) {
      tokens.push_back({TokenKind::AromaticAtom, std::string(1, c), i});
      ++i;
    } else if (is_bond_char(c)) {
      tokens.push_back({TokenKind::Bond, std::string(1, c), i});
      ++i;
    } else if (c == '(') {
      tokens.push_back({TokenKind::BranchOpen, "(", i});
      ++i;
    } else if (c == ')') {
      tokens.push_back({TokenKind::BranchClose, ")", i});
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      tokens.push_back({TokenKind::RingClosure, std::string(1, c), i});
      ++i;
    } else if (c == '%') {
      if (i + 2 >= n || !std::isdigit(static_cast<unsigned char>(smiles[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(smiles[i + 2])))
        fail(ParseError::Kind::InvalidSyntax, i, "'%' must be followed by two digits");
      tokens.push_back({TokenKind::RingClosure, smiles.substr(i, 3), i});
      i += 3;
    } else if (c == '.') {
      tokens.push_back({TokenKind::Dot, ".", i});
      ++i;
    } else {
      fail(ParseError::Kind::UnknownCharacter, i,
           std::string("unsupported character '") + c + "'");
    }
  }
  return tokens;
}

Molecule parse(const std::string& smiles) {
  const std::vector<SmilesToken> tokens = tokenize(smiles);

  Molecule mol;
  mol.source = smiles;

  int prev = -1;                                   // atom awaiting the next bond
  bool have_prev = false;
  std::vector<std::pair<int, std::size_t>> branch_stack;  // (atom, '(' position)
  std::optional<BondOrder> pending;                // explicit bond symbol
  std::size_t pending_pos = 0;

  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
    std::size_t position;
  };
  std::map<int, OpenRing> open_rings;
  std::set<std::pair<int, int>> bond_pairs;

  auto add_bond = [&](int a, int b, BondOrder order, std::size_t pos) {
    if (a > b) std::swap(a, b);
    if (!bond_pairs.insert({a, b}).second)
      fail(ParseError::Kind::InvalidSyntax, pos, "duplicate bond between atoms");
    mol.bonds.push_back({a, b, order});
  };

  auto resolve_order = [&](int a, int b, std::optional<BondOrder> explicit_order) {
    if (explicit_order) return *explicit_order;
    if (mol.atoms[a].aromatic && mol.atoms[b].aromatic) return BondOrder::Aromatic;
    return BondOrder::Single;
  };

  auto handle_atom = [&](Atom atom, std::size_t pos) {
    mol.atoms.push_back(std::move(atom));
    const int idx = static_cast<int>(mol.atoms.size()) - 1;
    if (have_prev) {
      add_bond(prev, idx, resolve_order(prev, idx, pending), pos);
    } else if (pending) {
      fail(ParseError::Kind::InvalidSyntax, pending_pos, "bond symbol with no preceding atom");
    }
    pending.reset();
    prev = idx;
    have_prev = true;
  };

  for (const SmilesToken& tok : tokens) {
    switch (tok.kind) {
      case TokenKind::OrganicAtom: {
        Atom a;
        a.element = tok.text;
        handle_atom(std::move(a), tok.position);
        break;
      }
      case TokenKind::AromaticAtom: {
        Atom a;
        a.element = std::string(1, static_cast<char>(
                          std::toupper(static_cast<unsigned char>(tok.text[0]))));
        a.aromatic = true;
        handle_atom(std::move(a), tok.position);
        break;
      }
      case TokenKind::BracketAtom: {
        BracketFields f = parse_bracket(tok.text, tok.position);
        Atom a;
        a.element = f.element;
        a.aromatic = f.aromatic;
        a.formal_charge = f.charge;
        a.isotope = f.isotope;
        a.bracket = true;
        if (f.has_h) a.explicit_h_count = f.h_count;
        handle_atom(std::move(a), tok.position);
        break;
      }
      case TokenKind::Bond: {
        if (pending)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "two consecutive bond symbols");
        if (!have_prev)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "bond symbol with no preceding atom");
        const char b = tok.text[0];
        if (b == '=') pending = BondOrder::Double;
        else if (b == '#') pending = BondOrder::Triple;
        else if (b == ':') pending = BondOrder::Aromatic;
        else pending = BondOrder::Single;  // '-', '/' and '\' (stereo ignored)
        pending_pos = tok.position;
        break;
      }
      case TokenKind::BranchOpen: {
        if (!have_prev)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "branch with no preceding atom");
        if (pending)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "bond symbol before '('");
        branch_stack.push_back({prev, tok.position});
        break;
      }
      case TokenKind::BranchClose: {
        if (branch_stack.empty())
          fail(ParseError::Kind::UnbalancedParenthesis, tok.position, "')' without matching '('");
        if (pending)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "dangling bond symbol before ')'");
        prev = branch_stack.back().first;
        have_prev = true;
        branch_stack.pop_back();
        break;
      }
      case TokenKind::RingClosure: {
        if (!have_prev)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "ring closure with no preceding atom");
        const int idx = tok.ring_index();
        auto it = open_rings.find(idx);
        if (it == open_rings.end()) {
          open_rings[idx] = {prev, pending, tok.position};
        } else {
          OpenRing open = it->second;
          open_rings.erase(it);
          if (open.atom == prev)
            fail(ParseError::Kind::InvalidSyntax, tok.position, "ring closure bonds an atom to itself");
          if (open.order && pending && *open.order != *pending)
            fail(ParseError::Kind::InvalidSyntax, tok.position, "conflicting ring closure bond orders");
          std::optional<BondOrder> explicit_order = pending ? pending : open.order;
          add_bond(open.atom, prev, resolve_order(open.atom, prev, explicit_order), tok.position);
        }
        pending.reset();
        break;
      }
      case TokenKind::Dot: {
        if (pending)
          fail(ParseError::Kind::InvalidSyntax, tok.position, "bond symbol before '.'");
        have_prev = false;
        prev = -1;
        break;
      }
    }
  }

  if (pending)
    fail(ParseError::Kind::InvalidSyntax, pending_pos, "dangling bond symbol at end of input");
  if (!open_rings.empty()) {
    const auto& [idx, open] = *open_rings.begin();
    fail(ParseError::Kind::UnmatchedRingClosure, open.position,
         "ring closure " + std::to_string(idx) + " never closed", idx);
  }
  if (!branch_stack.empty())
    fail(ParseError::Kind::UnbalancedParenthesis, branch_stack.back().second,
         "'(' without matching ')'");

  for (const Bond& b : mol.bonds) {
    mol.atoms[b.a].degree++;
    mol.atoms[b.b].degree++;
  }
  return mol;
}

std::vector<int> Molecule::neighbors(int atom_index) const {
  std::vector<int> out;
  for (const Bond& b : bonds) {
    if (b.a == atom_index) out.push_back(b.b);
    else if (b.b == atom_index) out.push_back(b.a);
  }
  return out;
}

int implicit_hydrogens(const Molecule& m, int atom_index) {
  const Atom& atom = m.atoms.at(atom_index);
  if (atom.bracket) return atom.explicit_h_count.value_or(0);

  double order_sum = 0.0;
  for (const Bond& b : m.bonds) {
    if (b.a != atom_index && b.b != atom_index) continue;
    switch (b.order) {
      case BondOrder::Single: order_sum += 1.0; break;
      case BondOrder::Double: order_sum += 2.0; break;
      case BondOrder::Triple: order_sum += 3.0; break;
      case BondOrder::Aromatic: order_sum += 1.5; break;
    }
  }
  const int used = static_cast<int>(order_sum);  // floor; sum is non-negative
  const int v = default_valence(atom.element);
  return std::max(0, v - used);
}

int atomic_number(const std::string& element) {
  auto it = element_table().find(element);
  return it == element_table().end() ? 0 : it->second;
}

std::vector<bool> ring_atoms(const Molecule& m) {
  const int n = static_cast<int>(m.atoms.size());
  const int ne = static_cast<int>(m.bonds.size());
  std::vector<bool> in_ring(n, false);
  if (ne == 0) return in_ring;

  // Adjacency as (neighbor, edge id).
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int e = 0; e < ne; ++e) {
    adj[m.bonds[e].a].push_back({m.bonds[e].b, e});
    adj[m.bonds[e].b].push_back({m.bonds[e].a, e});
  }

  // Iterative bridge finding; every non-bridge edge lies on a cycle.
  std::vector<int> disc(n, -1), low(n, 0), parent_edge(n, -1);
  std::vector<bool> is_bridge(ne, false);
  int timer = 0;

  struct Frame {
    int node;
    std::size_t next_edge;
  };

  for (int root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    std::vector<Frame> stack;
    disc[root] = low[root] = timer++;
    stack.push_back({root, 0});

    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_edge < adj[f.node].size()) {
        auto [to, eid] = adj[f.node][f.next_edge++];
        if (eid == parent_edge[f.node]) continue;
        if (disc[to] == -1) {
          disc[to] = low[to] = timer++;
          parent_edge[to] = eid;
          stack.push_back({to, 0});
        } else {
          low[f.node] = std::min(low[f.node], disc[to]);
        }
      } else {
        stack.pop_back();
        if (!stack.empty()) {
          int up = stack.back().node;
          low[up] = std::min(low[up], low[f.node]);
          if (low[f.node] > disc[up]) is_bridge[parent_edge[f.node]] = true;
        }
      }
    }
  }

  for (int e = 0; e < ne; ++e) {
    if (!is_bridge[e]) {
      in_ring[m.bonds[e].a] = true;
      in_ring[m.bonds[e].b] = true;
    }
  }
  return in_ring;
}

std::vector<std::string> tokenize_symbols(const std::string& smiles) {
  std::vector<std::string> out;
  for (const SmilesToken& t : tokenize(smiles)) out.push_back(t.text);
  return out;
}

}  // namespace molgp
