#include <cctype>
#include <map>
#include <vector>

#include "moltx/molgraph.hpp"

namespace moltx {

namespace {

struct PendingRing {
  int atom;
  std::optional<BondOrder> order;
  std::size_t offset;  // where the closure digit appeared, for diagnostics
};

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;
  std::vector<int> branch_stack;
  std::map<int, PendingRing> open_rings;
  int prev_atom = -1;
  std::optional<BondOrder> pending_order;
  std::size_t pending_offset = 0;

  explicit Parser(const std::string& str) : s(str) {}

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }

  [[noreturn]] void unsupported(const std::string& what, std::size_t at) {
    throw UnsupportedToken(what, at);
  }

  void add_bond(int u, int v, std::optional<BondOrder> explicit_order,
                std::size_t at) {
    if (u == v) throw ParseError("ring closure bonds an atom to itself", at);
    for (const RawBond& b : bonds)
      if ((b.u == u && b.v == v) || (b.u == v && b.v == u))
        throw ParseError("duplicate bond between atoms", at);
    BondOrder order;
    if (explicit_order) {
      order = *explicit_order;
    } else if (atoms[u].aromatic && atoms[v].aromatic) {
      order = BondOrder::kAromatic;
    } else {
      order = BondOrder::kSingle;
    }
    bonds.push_back({u, v, order});
  }

  void place_atom(RawAtom atom, std::size_t at) {
    atoms.push_back(atom);
    const int cur = static_cast<int>(atoms.size()) - 1;
    if (prev_atom >= 0) add_bond(prev_atom, cur, pending_order, at);
    pending_order.reset();
    prev_atom = cur;
  }

  void ring_closure(int number, std::size_t at) {
    if (prev_atom < 0)
      throw ParseError("ring closure before any atom", at);
    auto it = open_rings.find(number);
    if (it == open_rings.end()) {
      open_rings.emplace(number,
                         PendingRing{prev_atom, pending_order, at});
      pending_order.reset();
      return;
    }
    PendingRing open = it->second;
    open_rings.erase(it);
    std::optional<BondOrder> order = pending_order;
    if (!order) order = open.order;
    if (pending_order && open.order && *pending_order != *open.order)
      throw ParseError("conflicting bond orders on ring closure", at);
    add_bond(open.atom, prev_atom, order, at);
    pending_order.reset();
  }

  RawAtom read_organic_atom() {
    const std::size_t at = pos;
    const char c = s[pos];
    RawAtom a;
    if (c == 'C' && pos + 1 < s.size() && s[pos + 1] == 'l') {
      a.element = 17;
      pos += 2;
      return a;
    }
    if (c == 'B' && pos + 1 < s.size() && s[pos + 1] == 'r') {
      a.element = 35;
      pos += 2;
      return a;
    }
    switch (c) {
      case 'B': a.element = 5; break;
      case 'C': a.element = 6; break;
      case 'N': a.element = 7; break;
      case 'O': a.element = 8; break;
      case 'P': a.element = 15; break;
      case 'S': a.element = 16; break;
      case 'F': a.element = 9; break;
      case 'I': a.element = 53; break;
      case 'b': a.element = 5; a.aromatic = true; break;
      case 'c': a.element = 6; a.aromatic = true; break;
      case 'n': a.element = 7; a.aromatic = true; break;
      case 'o': a.element = 8; a.aromatic = true; break;
      case 'p': a.element = 15; a.aromatic = true; break;
      case 's': a.element = 16; a.aromatic = true; break;
      default:
        unsupported(std::string("unexpected character '") + c + "'", at);
    }
    ++pos;
    return a;
  }

  RawAtom read_bracket_atom() {
    const std::size_t open_at = pos;
    ++pos;  // consume '['
    if (eof()) throw ParseError("unterminated bracket atom", open_at);
    if (std::isdigit(static_cast<unsigned char>(peek())))
      unsupported("isotope specifications are not supported", pos);

    RawAtom a;
    // Element symbol: one uppercase + optional lowercase, or a single
    // aromatic lowercase letter.
    if (std::isupper(static_cast<unsigned char>(peek()))) {
      std::string sym(1, s[pos]);
      ++pos;
      if (!eof() && std::islower(static_cast<unsigned char>(peek()))) {
        std::string two = sym + s[pos];
        if (element_from_symbol(two)) {
          sym = two;
          ++pos;
        }
      }
      auto z = element_from_symbol(sym);
      if (!z) unsupported("unknown element '" + sym + "'", open_at + 1);
      a.element = *z;
    } else if (std::islower(static_cast<unsigned char>(peek()))) {
      const char c = peek();
      switch (c) {
        case 'b': a.element = 5; break;
        case 'c': a.element = 6; break;
        case 'n': a.element = 7; break;
        case 'o': a.element = 8; break;
        case 'p': a.element = 15; break;
        case 's': a.element = 16; break;
        default:
          unsupported(std::string("unknown aromatic symbol '") + c + "'",
                      pos);
      }
      a.aromatic = true;
      ++pos;
    } else {
      unsupported("expected element symbol in bracket atom", pos);
    }

    // Optional hydrogen count: parsed and discarded, hydrogens are not
    // materialized as graph atoms.
    if (!eof() && peek() == 'H') {
      ++pos;
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
    }

    if (!eof() && (peek() == '+' || peek() == '-')) {
      const int sign = peek() == '+' ? 1 : -1;
      ++pos;
      int magnitude = 1;
      if (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = 0;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
          magnitude = magnitude * 10 + (peek() - '0');
          ++pos;
        }
      }
      a.formal_charge = sign * magnitude;
    }

    if (eof()) throw ParseError("unterminated bracket atom", open_at);
    if (peek() != ']') {
      if (peek() == '@')
        unsupported("stereochemistry markers are not supported", pos);
      unsupported(std::string("unexpected character '") + peek() +
                      "' in bracket atom",
                  pos);
    }
    ++pos;  // consume ']'
    return a;
  }

  MolecularGraph run() {
    while (!eof()) {
      const char c = peek();
      const std::size_t at = pos;
      if (c == '[') {
        place_atom(read_bracket_atom(), at);
      } else if (std::isupper(static_cast<unsigned char>(c)) ||
                 (std::islower(static_cast<unsigned char>(c)) &&
                  std::string("bcnops").find(c) != std::string::npos)) {
        place_atom(read_organic_atom(), at);
      } else if (c == '-') {
        pending_order = BondOrder::kSingle;
        pending_offset = at;
        ++pos;
      } else if (c == '=') {
        pending_order = BondOrder::kDouble;
        pending_offset = at;
        ++pos;
      } else if (c == '#') {
        pending_order = BondOrder::kTriple;
        pending_offset = at;
        ++pos;
      } else if (c == '(') {
        if (prev_atom < 0)
          throw UnbalancedBranch("branch opened before any atom", at);
        branch_stack.push_back(prev_atom);
        ++pos;
      } else if (c == ')') {
        if (branch_stack.empty())
          throw UnbalancedBranch("unmatched ')'", at);
        prev_atom = branch_stack.back();
        branch_stack.pop_back();
        ++pos;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        ring_closure(c - '0', at);
        ++pos;
      } else if (c == '%') {
        if (pos + 2 >= s.size() ||
            !std::isdigit(static_cast<unsigned char>(s[pos + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s[pos + 2])))
          throw ParseError("'%' requires two digits", at);
        ring_closure((s[pos + 1] - '0') * 10 + (s[pos + 2] - '0'), at);
        pos += 3;
      } else if (c == '.') {
        unsupported("multi-fragment input ('.') is not supported", at);
      } else if (c == '/' || c == '\\' || c == '@') {
        unsupported("stereochemistry markers are not supported", at);
      } else if (c == '*') {
        unsupported("wildcard atoms are not supported", at);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        unsupported("whitespace inside SMILES", at);
      } else {
        unsupported(std::string("unexpected character '") + c + "'", at);
      }
    }

    if (!branch_stack.empty())
      throw UnbalancedBranch("unclosed '(' at end of input", s.size());
    if (!open_rings.empty())
      throw DanglingRingClosure("unclosed ring bond " +
                                    std::to_string(open_rings.begin()->first),
                                open_rings.begin()->second.offset);
    if (pending_order)
      throw ParseError("dangling bond symbol", pending_offset);
    if (atoms.empty()) throw ParseError("empty SMILES", 0);
    return finalize_graph(atoms, bonds);
  }
};

}  // namespace

MolecularGraph parse_smiles(const std::string& smiles) {
  Parser p(smiles);
  return p.run();
}

}  // namespace moltx
