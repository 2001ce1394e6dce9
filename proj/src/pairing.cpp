#include "moltx/pairing.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "moltx/rng.hpp"

namespace moltx {

std::string canonical_key(const CompoundRecord& rec) {
  if (rec.smiles) return *rec.smiles;
  return graph_key(rec.graph);
}

Assay dedup_assay(const Assay& a) {
  std::unordered_map<std::string, std::set<int>> labels_by_key;
  for (const auto& rec : a.records)
    labels_by_key[canonical_key(rec)].insert(rec.label());

  Assay out;
  out.id = a.id;
  out.family = a.family;
  std::set<std::string> kept;
  for (const auto& rec : a.records) {
    const std::string key = canonical_key(rec);
    if (labels_by_key[key].size() > 1) continue;  // conflicting labels
    if (!kept.insert(key).second) continue;       // duplicate, keep first
    out.records.push_back(rec);
  }
  return out;
}

std::pair<Assay, Assay> resolve_pair(const Assay& a, const Assay& b,
                                     std::uint64_t seed) {
  std::unordered_map<std::string, int> label_a, label_b;
  for (const auto& rec : a.records) label_a[canonical_key(rec)] = rec.label();
  for (const auto& rec : b.records) label_b[canonical_key(rec)] = rec.label();

  std::set<std::string> conflicting;
  std::vector<std::string> shared_same;  // in first-seen order within a
  for (const auto& rec : a.records) {
    const std::string key = canonical_key(rec);
    auto it = label_b.find(key);
    if (it == label_b.end()) continue;
    if (it->second != rec.label())
      conflicting.insert(key);
    else
      shared_same.push_back(key);
  }

  // A random half of the shared same-label compounds stays in `a` (floor for
  // odd counts), the rest go to `b`.
  Rng rng(Rng::derive(seed, 0x70616972));
  std::vector<std::string> shuffled = shared_same;
  rng.shuffle(shuffled);
  std::set<std::string> stay_in_a(
      shuffled.begin(), shuffled.begin() + shuffled.size() / 2);
  std::set<std::string> shared(shared_same.begin(), shared_same.end());

  std::pair<Assay, Assay> out;
  out.first.id = a.id;
  out.first.family = a.family;
  out.second.id = b.id;
  out.second.family = b.family;
  for (const auto& rec : a.records) {
    const std::string key = canonical_key(rec);
    if (conflicting.count(key)) continue;
    if (shared.count(key) && !stay_in_a.count(key)) continue;
    out.first.records.push_back(rec);
  }
  for (const auto& rec : b.records) {
    const std::string key = canonical_key(rec);
    if (conflicting.count(key)) continue;
    if (shared.count(key) && stay_in_a.count(key)) continue;
    out.second.records.push_back(rec);
  }
  return out;
}

Assay balance_assay(const Assay& a, const Dataset& inactive_pool,
                    std::uint64_t seed) {
  std::vector<const CompoundRecord*> actives, inactives;
  for (const auto& rec : a.records)
    (rec.label() == 1 ? actives : inactives).push_back(&rec);

  Rng rng(Rng::derive(seed, 0x62616c));
  Assay out;
  out.id = a.id;
  out.family = a.family;
  for (const auto* rec : actives) out.records.push_back(*rec);

  const std::size_t need = actives.size();
  std::vector<const CompoundRecord*> chosen;
  if (inactives.size() <= need) {
    chosen = inactives;
  } else {
    std::vector<std::size_t> idx(inactives.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    for (std::size_t i = 0; i < need; ++i) chosen.push_back(inactives[idx[i]]);
    std::sort(chosen.begin(), chosen.end(),
              [&](const CompoundRecord* x, const CompoundRecord* y) {
                return x < y;  // restore dataset order
              });
  }

  if (chosen.size() < need) {
    // Draw the shortfall from the external pool, skipping compounds already
    // present in the assay.
    std::set<std::string> present;
    for (const auto& rec : a.records) present.insert(canonical_key(rec));
    std::vector<std::size_t> idx(inactive_pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size() && chosen.size() < need; ++i) {
      const CompoundRecord& cand = inactive_pool[idx[i]];
      if (cand.has_label() && cand.label() != 0) continue;
      if (present.count(canonical_key(cand))) continue;
      chosen.push_back(&cand);
    }
    if (chosen.size() < need)
      throw InsufficientInactives(
          "balance_assay: pool exhausted for assay " + a.id + " (need " +
          std::to_string(need) + ", have " + std::to_string(chosen.size()) +
          ")");
  }

  for (const auto* rec : chosen) {
    CompoundRecord copy = *rec;
    copy.set_label(0);
    out.records.push_back(std::move(copy));
  }
  return out;
}

PairProfile profile(const Assay& a, const Assay& b, int radius, int dim) {
  std::vector<MolecularGraph> ap, an, bp, bn;
  for (const auto& rec : a.records)
    (rec.label() == 1 ? ap : an).push_back(rec.graph);
  for (const auto& rec : b.records)
    (rec.label() == 1 ? bp : bn).push_back(rec.graph);
  PairProfile pr;
  pr.sim_pp = mean_cross_similarity(ap, bp, radius, dim);
  pr.sim_nn = mean_cross_similarity(an, bn, radius, dim);
  pr.sim_pn = mean_cross_similarity(ap, bn, radius, dim);
  pr.sim_np = mean_cross_similarity(an, bp, radius, dim);
  return pr;
}

PairSelection select_pairs(const std::map<PairKey, PairProfile>& profiles,
                           double margin) {
  PairSelection sel;
  double margin_total = 0.0;
  for (const auto& [key, pr] : profiles) {
    if (pr.sim_pp > pr.sim_pn && pr.sim_pp > pr.sim_np) {
      sel.p0.push_back(key);
      margin_total += pr.margin_sum();
      if (pr.margin_sum() >= margin) sel.p.push_back(key);
    }
  }
  if (!sel.p0.empty())
    sel.average_margin = margin_total / static_cast<double>(sel.p0.size());
  return sel;
}

}  // namespace moltx
