#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moltx/fingerprint.hpp"
#include "moltx/molgraph.hpp"

namespace moltx {

// Bioassay curation pipeline: in-assay dedup, cross-assay conflict
// resolution and duplicate splitting, 1:1 class balancing, mean
// cross-similarity profiles, and the two-stage pair selection.

struct Assay {
  std::string id;
  std::optional<std::string> family;
  Dataset records;
};

// Duplicate-detection key: the source SMILES when present, else a
// deterministic graph digest.
std::string canonical_key(const CompoundRecord& rec);

// Same-label duplicates collapse to the first occurrence; compounds carried
// with both labels are dropped entirely.
Assay dedup_assay(const Assay& a);

// Cross-assay conflicting-label compounds are removed from both assays;
// cross-assay same-label duplicates are split, a random half (floor) staying
// in `a` and the rest in `b`.
std::pair<Assay, Assay> resolve_pair(const Assay& a, const Assay& b,
                                     std::uint64_t seed);

// Keeps all actives and samples inactives (own first, then the pool) to an
// exact 1:1 class ratio.
Assay balance_assay(const Assay& a, const Dataset& inactive_pool,
                    std::uint64_t seed);

struct PairProfile {
  double sim_pp = 0.0;  // sim(A+, B+)
  double sim_nn = 0.0;  // sim(A-, B-)
  double sim_pn = 0.0;  // sim(A+, B-)
  double sim_np = 0.0;  // sim(A-, B+)

  double margin_sum() const { return 2.0 * sim_pp - sim_pn - sim_np; }
};

PairProfile profile(const Assay& a, const Assay& b, int radius = 3,
                    int dim = 2048);

struct PairKey {
  std::string first;
  std::string second;
  auto operator<=>(const PairKey&) const = default;
};

// P0: sim_pp strictly dominates both mixed-label similarities.
// P:  additionally (sim_pp - sim_pn) + (sim_pp - sim_np) >= margin.
struct PairSelection {
  std::vector<PairKey> p0;
  std::vector<PairKey> p;
  double average_margin = 0.0;  // mean margin_sum over P0
};

PairSelection select_pairs(
    const std::map<PairKey, PairProfile>& profiles, double margin = 0.026);

}  // namespace moltx
