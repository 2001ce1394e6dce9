#include "moltx/fingerprint.hpp"

#include <algorithm>
#include <cstdio>

namespace moltx {

namespace {

// splitmix64 finalizer as the mixing primitive; combined values are order
// sensitive, so callers sort neighbor lists first.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t atom_invariant(const AtomFeatures& a) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  h = combine(h, static_cast<std::uint64_t>(a.element));
  h = combine(h, static_cast<std::uint64_t>(a.degree));
  h = combine(h, static_cast<std::uint64_t>(a.formal_charge + 8));
  h = combine(h, a.aromatic ? 1u : 0u);
  return h;
}

std::vector<std::uint64_t> round_identifiers(
    const MolecularGraph& g, const std::vector<std::uint64_t>& prev) {
  std::vector<std::uint64_t> next(g.atoms.size());
  for (int u = 0; u < g.num_atoms(); ++u) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
    env.reserve(g.incoming[u].size());
    for (const auto& in : g.incoming[u]) {
      const auto& bond = g.bonds[g.directed_edges[in.edge].bond];
      env.emplace_back(
          static_cast<std::uint64_t>(bond_order_code(bond.features.order)),
          prev[static_cast<std::size_t>(in.src)]);
    }
    std::sort(env.begin(), env.end());
    std::uint64_t h = combine(0x452821e638d01377ULL, prev[u]);
    for (const auto& [code, nid] : env) {
      h = combine(h, code);
      h = combine(h, nid);
    }
    next[u] = h;
  }
  return next;
}

}  // namespace

FingerprintVector morgan_count(const MolecularGraph& g, int radius, int dim) {
  if (radius < 0) throw Error("morgan_count: radius must be >= 0");
  if (dim < 1) throw Error("morgan_count: dim must be >= 1");
  FingerprintVector fp;
  fp.radius = radius;
  fp.dim = dim;
  fp.counts.assign(static_cast<std::size_t>(dim), 0);

  std::vector<std::uint64_t> ids(g.atoms.size());
  for (int u = 0; u < g.num_atoms(); ++u) ids[u] = atom_invariant(g.atoms[u]);
  for (int r = 0; ; ++r) {
    for (std::uint64_t id : ids)
      ++fp.counts[static_cast<std::size_t>(id % static_cast<std::uint64_t>(dim))];
    if (r == radius) break;
    ids = round_identifiers(g, ids);
  }
  return fp;
}

FingerprintVector morgan_binary(const MolecularGraph& g, int radius, int dim) {
  FingerprintVector fp = morgan_count(g, radius, dim);
  for (auto& c : fp.counts) c = c > 0 ? 1 : 0;
  return fp;
}

double tanimoto(const FingerprintVector& a, const FingerprintVector& b) {
  if (a.dim != b.dim)
    throw DimensionMismatch("tanimoto: " + std::to_string(a.dim) + " vs " +
                            std::to_string(b.dim));
  std::uint64_t num = 0, den = 0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    num += std::min(a.counts[i], b.counts[i]);
    den += std::max(a.counts[i], b.counts[i]);
  }
  if (den == 0) return 1.0;  // both all-zero: identical by convention
  return static_cast<double>(num) / static_cast<double>(den);
}

double mean_cross_similarity(const std::vector<MolecularGraph>& a,
                             const std::vector<MolecularGraph>& b, int radius,
                             int dim) {
  if (a.empty() || b.empty())
    throw EmptySet("mean_cross_similarity: empty compound set");
  std::vector<FingerprintVector> fa, fb;
  fa.reserve(a.size());
  fb.reserve(b.size());
  for (const auto& g : a) fa.push_back(morgan_count(g, radius, dim));
  for (const auto& g : b) fb.push_back(morgan_count(g, radius, dim));
  double total = 0.0;
  for (const auto& x : fa)
    for (const auto& y : fb) total += tanimoto(x, y);
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::string graph_key(const MolecularGraph& g) {
  // Refine atom identifiers as many rounds as there are atoms, then digest
  // the sorted multiset; isomorphic graphs agree regardless of atom order.
  std::vector<std::uint64_t> ids(g.atoms.size());
  for (int u = 0; u < g.num_atoms(); ++u) ids[u] = atom_invariant(g.atoms[u]);
  for (int r = 0; r < g.num_atoms(); ++r) ids = round_identifiers(g, ids);
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = combine(0x13198a2e03707344ULL,
                            static_cast<std::uint64_t>(g.num_atoms()));
  for (std::uint64_t id : ids) h = combine(h, id);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "g%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace moltx
