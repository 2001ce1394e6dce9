// Independent oracles for the property and acceptance tests. Everything in
// here recomputes results from first principles with plain loops, sharing no
// code with the implementation paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "moltx/molgraph.hpp"
#include "moltx/rng.hpp"

namespace oracle {

// ---- dense helpers (row-major, no kernels) ----

inline std::vector<double> matvec(const std::vector<double>& W,
                                  const std::vector<double>& x, int m,
                                  int n) {
  std::vector<double> y(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y[i] += W[i * n + j] * x[j];
  return y;
}

inline std::vector<double> relu(std::vector<double> x) {
  for (auto& v : x) v = v > 0.0 ? v : 0.0;
  return x;
}

inline std::vector<double> concat(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::vector<double> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// ---- recursive directed-edge enumeration of the message-passing encoder ----
//
// h_uv^(t) is computed by direct recursion on t with no iteration state and
// no memoization: each call re-derives the entire message tree.

struct EncoderWeights {
  std::vector<double> W0;  // d x (aw + bw)
  std::vector<double> W;   // d x d
  std::vector<double> We;  // d x (aw + d)
  int d = 0;
};

inline std::vector<double> edge_state_recursive(
    const moltx::MolecularGraph& g, const EncoderWeights& w, int edge,
    int t) {
  const auto& e = g.directed_edges[edge];
  const std::vector<double> h0 = relu(
      matvec(w.W0,
             concat(g.atoms[e.u].encoded, g.bonds[e.bond].features.encoded),
             w.d,
             static_cast<int>(g.atoms[e.u].encoded.size() +
                              g.bonds[e.bond].features.encoded.size())));
  if (t == 0) return h0;
  std::vector<double> message(w.d, 0.0);
  const int reverse = edge ^ 1;
  for (const auto& in : g.incoming[e.u]) {
    if (in.edge == reverse) continue;
    const std::vector<double> prev = edge_state_recursive(g, w, in.edge, t - 1);
    for (int i = 0; i < w.d; ++i) message[i] += prev[i];
  }
  std::vector<double> mixed = matvec(w.W, message, w.d, w.d);
  for (int i = 0; i < w.d; ++i) mixed[i] += h0[i];
  return relu(mixed);
}

inline std::vector<double> encode_mean_recursive(
    const moltx::MolecularGraph& g, const EncoderWeights& w, int tau) {
  std::vector<double> pooled(w.d, 0.0);
  for (int u = 0; u < g.num_atoms(); ++u) {
    std::vector<double> hu(w.d, 0.0);
    for (const auto& in : g.incoming[u]) {
      const std::vector<double> h = edge_state_recursive(g, w, in.edge, tau);
      for (int i = 0; i < w.d; ++i) hu[i] += h[i];
    }
    const std::vector<double> su =
        relu(matvec(w.We, concat(g.atoms[u].encoded, hu), w.d,
                    static_cast<int>(g.atoms[u].encoded.size()) + w.d));
    for (int i = 0; i < w.d; ++i) pooled[i] += su[i];
  }
  for (auto& v : pooled) v /= static_cast<double>(g.num_atoms());
  return pooled;
}

// ---- brute-force metric definitions ----

inline double roc_auc_bruteforce(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  std::int64_t numer2 = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) numer2 += 2;
      else if (scores[i] == scores[j]) numer2 += 1;
    }
  }
  return static_cast<double>(numer2) / (2.0 * static_cast<double>(pairs));
}

inline double nci_bruteforce(const std::vector<double>& activities,
                             const std::vector<double>& scores) {
  std::int64_t pairs = 0, wrong = 0;
  for (std::size_t i = 0; i < activities.size(); ++i)
    for (std::size_t j = 0; j < activities.size(); ++j)
      if (activities[i] > activities[j]) {
        ++pairs;
        if (scores[i] <= scores[j]) ++wrong;
      }
  return static_cast<double>(wrong) / static_cast<double>(pairs);
}

// ---- graph relabeling ----

inline moltx::MolecularGraph permute_graph(const moltx::MolecularGraph& g,
                                           const std::vector<int>& perm) {
  std::vector<moltx::RawAtom> atoms(g.atoms.size());
  for (int u = 0; u < g.num_atoms(); ++u)
    atoms[perm[u]] = {g.atoms[u].element, g.atoms[u].formal_charge,
                      g.atoms[u].aromatic};
  std::vector<moltx::RawBond> bonds;
  for (const auto& b : g.bonds)
    bonds.push_back({perm[b.u], perm[b.v], b.features.order});
  return moltx::finalize_graph(atoms, bonds);
}

inline std::vector<int> random_permutation(int n, moltx::Rng& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  return perm;
}

}  // namespace oracle
