#include "moltx/molgraph.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <set>
#include <unordered_map>

namespace moltx {

int bond_order_code(BondOrder o) { return static_cast<int>(o); }

const char* bond_order_name(BondOrder o) {
  switch (o) {
    case BondOrder::kSingle: return "single";
    case BondOrder::kDouble: return "double";
    case BondOrder::kTriple: return "triple";
    case BondOrder::kAromatic: return "aromatic";
  }
  return "single";
}

std::optional<BondOrder> bond_order_from_name(std::string_view name) {
  if (name == "single") return BondOrder::kSingle;
  if (name == "double") return BondOrder::kDouble;
  if (name == "triple") return BondOrder::kTriple;
  if (name == "aromatic") return BondOrder::kAromatic;
  return std::nullopt;
}

namespace {

// Atomic numbers with a one-hot slot of their own; everything else lands in
// the trailing "other" slot.
constexpr std::array<int, 11> kElementAlphabet = {1, 5, 6, 7, 8, 9,
                                                  15, 16, 17, 35, 53};

int element_slot(int z) {
  for (std::size_t i = 0; i < kElementAlphabet.size(); ++i)
    if (kElementAlphabet[i] == z) return static_cast<int>(i);
  return static_cast<int>(kElementAlphabet.size());  // "other"
}

// Standard atomic weights for H..I; coarse fallback beyond the table.
constexpr std::array<double, 54> kMass = {
    0.0,    1.008,  4.003,  6.94,   9.012,  10.81,  12.011, 14.007, 15.999,
    18.998, 20.180, 22.990, 24.305, 26.982, 28.085, 30.974, 32.06,  35.45,
    39.948, 39.098, 40.078, 44.956, 47.867, 50.942, 51.996, 54.938, 55.845,
    58.933, 58.693, 63.546, 65.38,  69.723, 72.630, 74.922, 78.971, 79.904,
    83.798, 85.468, 87.62,  88.906, 91.224, 92.906, 95.95,  97.0,   101.07,
    102.91, 106.42, 107.87, 112.41, 114.82, 118.71, 121.76, 127.60, 126.90};

void encode_atom(AtomFeatures& a) {
  a.encoded.assign(AtomFeatures::kWidth, 0.0);
  int off = 0;
  a.encoded[off + element_slot(a.element)] = 1.0;
  off += 12;
  a.encoded[off + std::clamp(a.degree, 0, 5)] = 1.0;
  off += 6;
  a.encoded[off + std::clamp(a.formal_charge, -2, 2) + 2] = 1.0;
  off += 5;
  a.encoded[off] = a.aromatic ? 1.0 : 0.0;
  off += 1;
  a.encoded[off] = a.mass_scaled;
}

void encode_bond(BondFeatures& b) {
  b.encoded.assign(BondFeatures::kWidth, 0.0);
  b.encoded[bond_order_code(b.order)] = 1.0;
  b.encoded[4] = b.in_ring ? 1.0 : 0.0;
}

// A bond is in a ring iff its endpoints stay connected without it.
bool bond_in_ring(const std::vector<std::vector<int>>& adj, int nb_bonds,
                  const std::vector<RawBond>& bonds, int skip) {
  const int src = bonds[skip].u;
  const int dst = bonds[skip].v;
  (void)nb_bonds;
  std::vector<char> seen(adj.size(), 0);
  std::queue<int> q;
  q.push(src);
  seen[src] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (u == dst) return true;
    for (int b : adj[u]) {
      if (b == skip) continue;
      const int w = bonds[b].u == u ? bonds[b].v : bonds[b].u;
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
    }
  }
  return false;
}

}  // namespace

double atomic_mass(int element) {
  if (element >= 1 && element < static_cast<int>(kMass.size()))
    return kMass[static_cast<std::size_t>(element)];
  return 2.5 * element;
}

std::optional<int> element_from_symbol(std::string_view s) {
  static const std::unordered_map<std::string_view, int> table = {
      {"H", 1},  {"B", 5},  {"C", 6},   {"N", 7},   {"O", 8},  {"F", 9},
      {"P", 15}, {"S", 16}, {"Cl", 17}, {"Br", 35}, {"I", 53},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

const char* element_symbol(int element) {
  switch (element) {
    case 1: return "H";
    case 5: return "B";
    case 6: return "C";
    case 7: return "N";
    case 8: return "O";
    case 9: return "F";
    case 15: return "P";
    case 16: return "S";
    case 17: return "Cl";
    case 35: return "Br";
    case 53: return "I";
    default: return "?";
  }
}

MolecularGraph finalize_graph(const std::vector<RawAtom>& atoms,
                              const std::vector<RawBond>& bonds) {
  const int na = static_cast<int>(atoms.size());
  std::vector<std::vector<int>> adj(na);
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    const RawBond& b = bonds[k];
    if (b.u < 0 || b.u >= na || b.v < 0 || b.v >= na)
      throw Error("bond references atom out of range");
    if (b.u == b.v) throw Error("self-bond on atom " + std::to_string(b.u));
    auto key = std::minmax(b.u, b.v);
    if (!seen.insert(key).second)
      throw Error("duplicate bond " + std::to_string(b.u) + "-" +
                  std::to_string(b.v));
    adj[b.u].push_back(static_cast<int>(k));
    adj[b.v].push_back(static_cast<int>(k));
  }

  MolecularGraph g;
  g.atoms.resize(na);
  for (int i = 0; i < na; ++i) {
    AtomFeatures& a = g.atoms[i];
    a.element = atoms[i].element;
    a.formal_charge = atoms[i].formal_charge;
    a.aromatic = atoms[i].aromatic;
    a.degree = static_cast<int>(adj[i].size());
    a.mass_scaled = atomic_mass(a.element) / 100.0;
    encode_atom(a);
  }

  g.bonds.resize(bonds.size());
  g.incoming.resize(na);
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    Bond& b = g.bonds[k];
    b.u = bonds[k].u;
    b.v = bonds[k].v;
    b.features.order = bonds[k].order;
    b.features.in_ring =
        bond_in_ring(adj, static_cast<int>(bonds.size()), bonds,
                     static_cast<int>(k));
    encode_bond(b.features);

    const int e_uv = static_cast<int>(2 * k);
    const int e_vu = e_uv + 1;
    g.directed_edges.push_back({b.u, b.v, static_cast<int>(k)});
    g.directed_edges.push_back({b.v, b.u, static_cast<int>(k)});
    g.incoming[b.v].push_back({b.u, e_uv});
    g.incoming[b.u].push_back({b.v, e_vu});
  }
  return g;
}

namespace {

struct MatchState {
  const MolecularGraph* g;
  const MolecularGraph* motif;
  std::vector<int> assign;       // motif atom -> graph atom
  std::vector<char> used;        // graph atom used
};

bool atoms_match(const AtomFeatures& a, const AtomFeatures& b) {
  return a.element == b.element && a.aromatic == b.aromatic &&
         a.formal_charge == b.formal_charge;
}

std::optional<BondOrder> bond_between(const MolecularGraph& g, int u, int v) {
  for (const auto& in : g.incoming[v])
    if (in.src == u) return g.bonds[g.directed_edges[in.edge].bond].features.order;
  return std::nullopt;
}

bool extend_match(MatchState& st, std::size_t next) {
  if (next == st.assign.size()) return true;
  const AtomFeatures& want = st.motif->atoms[next];
  for (int cand = 0; cand < st.g->num_atoms(); ++cand) {
    if (st.used[cand] || !atoms_match(st.g->atoms[cand], want)) continue;
    bool ok = true;
    for (std::size_t prev = 0; prev < next && ok; ++prev) {
      const auto need = bond_between(*st.motif, static_cast<int>(prev),
                                     static_cast<int>(next));
      const auto have = bond_between(*st.g, st.assign[prev], cand);
      if (need.has_value()) {
        ok = have.has_value() && *have == *need;
      } else {
        // Non-adjacent motif atoms may map to adjacent graph atoms; only
        // required motif bonds constrain the embedding.
        ok = true;
      }
    }
    if (!ok) continue;
    st.assign[next] = cand;
    st.used[cand] = 1;
    if (extend_match(st, next + 1)) return true;
    st.used[cand] = 0;
  }
  return false;
}

}  // namespace

bool contains_subgraph(const MolecularGraph& g, const MolecularGraph& motif) {
  if (motif.num_atoms() == 0) return true;
  if (motif.num_atoms() > g.num_atoms()) return false;
  MatchState st;
  st.g = &g;
  st.motif = &motif;
  st.assign.assign(motif.num_atoms(), -1);
  st.used.assign(g.num_atoms(), 0);
  return extend_match(st, 0);
}

}  // namespace moltx
