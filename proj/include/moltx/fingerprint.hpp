#pragma once

#include <cstdint>
#include <vector>

#include "moltx/molgraph.hpp"

namespace moltx {

// Non-negative substructure count vector with its hashing parameters.
struct FingerprintVector {
  std::vector<std::uint32_t> counts;
  int radius = 0;
  int dim = 0;
};

// Circular count fingerprint. Round 0 hashes each atom's invariants
// (element, degree, charge, aromatic); round r hashes (own id, sorted
// (bond-order, neighbor id) pairs). Every identifier from every round is
// folded modulo dim into a bucket. The hash is a fixed 64-bit mix, stable
// across platforms; no RDKit bit compatibility is attempted.
FingerprintVector morgan_count(const MolecularGraph& g, int radius, int dim);

// morgan_count with buckets clamped to {0, 1}.
FingerprintVector morgan_binary(const MolecularGraph& g, int radius, int dim);

// Generalized (min/max) Tanimoto over count vectors; 1.0 when both vectors
// are all-zero.
double tanimoto(const FingerprintVector& a, const FingerprintVector& b);

// Mean tanimoto over all |A| x |B| pairs of Morgan-count fingerprints.
double mean_cross_similarity(const std::vector<MolecularGraph>& a,
                             const std::vector<MolecularGraph>& b,
                             int radius = 3, int dim = 2048);

// Deterministic isomorphism-stable digest of a featurized graph; the
// duplicate-detection key when no source SMILES is available.
std::string graph_key(const MolecularGraph& g);

}  // namespace moltx
