#include <cmath>

#include "moltx/molgraph.hpp"
#include "moltx/rng.hpp"

namespace moltx {

namespace {

struct RawGraph {
  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;

  int add_atom(int element, bool aromatic = false) {
    atoms.push_back({element, 0, aromatic});
    return static_cast<int>(atoms.size()) - 1;
  }
  void add_bond(int u, int v, BondOrder o = BondOrder::kSingle) {
    bonds.push_back({u, v, o});
  }
  // Appends `other`, returns index offset of its first atom.
  int append(const RawGraph& other) {
    const int off = static_cast<int>(atoms.size());
    for (const auto& a : other.atoms) atoms.push_back(a);
    for (const auto& b : other.bonds)
      bonds.push_back({b.u + off, b.v + off, b.order});
    return off;
  }
};

// Scaffolds are drawn from plain C/N chemistry so user motifs with other
// elements stay trivially absent from the decoys; motif-containing inactive
// candidates are rejected below regardless.
RawGraph random_scaffold(Rng& rng) {
  RawGraph g;
  switch (rng.uniform(3)) {
    case 0: {  // aromatic ring
      const int n = rng.bernoulli(0.5) ? 5 : 6;
      for (int i = 0; i < n; ++i)
        g.add_atom(rng.bernoulli(0.2) ? 7 : 6, true);
      for (int i = 0; i < n; ++i)
        g.add_bond(i, (i + 1) % n, BondOrder::kAromatic);
      break;
    }
    case 1: {  // aliphatic ring
      const int n = rng.uniform_int(4, 6);
      for (int i = 0; i < n; ++i) g.add_atom(6);
      for (int i = 0; i < n; ++i) g.add_bond(i, (i + 1) % n);
      break;
    }
    default: {  // random tree
      const int n = rng.uniform_int(3, 6);
      g.add_atom(rng.bernoulli(0.25) ? 7 : 6);
      for (int i = 1; i < n; ++i) {
        const int parent = static_cast<int>(rng.uniform(i));
        g.add_atom(rng.bernoulli(0.25) ? 7 : 6);
        g.add_bond(parent, i,
                   rng.bernoulli(0.15) ? BondOrder::kDouble
                                       : BondOrder::kSingle);
      }
      break;
    }
  }
  return g;
}

RawGraph raw_from_graph(const MolecularGraph& g) {
  RawGraph out;
  for (const auto& a : g.atoms)
    out.atoms.push_back({a.element, a.formal_charge, a.aromatic});
  for (const auto& b : g.bonds)
    out.bonds.push_back({b.u, b.v, b.features.order});
  return out;
}

// Decoration roughly matching the motif's atom count keeps actives and
// inactives size-comparable.
RawGraph decorate(RawGraph base, int extra_atoms, Rng& rng) {
  for (int i = 0; i < extra_atoms; ++i) {
    const int anchor = static_cast<int>(rng.uniform(base.atoms.size()));
    const int added = base.add_atom(rng.bernoulli(0.3) ? 7 : 6);
    base.add_bond(anchor, added);
  }
  return base;
}

MolecularGraph build_active(const RawGraph& motif, const RawGraph& scaffold,
                            Rng& rng) {
  RawGraph g = scaffold;
  const int motif_off = g.append(motif);
  const int scaffold_atom = static_cast<int>(rng.uniform(scaffold.atoms.size()));
  const int motif_atom =
      motif_off + static_cast<int>(rng.uniform(motif.atoms.size()));
  g.add_bond(scaffold_atom, motif_atom);
  return finalize_graph(g.atoms, g.bonds);
}

MolecularGraph build_inactive(const MolecularGraph& motif,
                              const RawGraph& scaffold, int motif_size,
                              Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    RawGraph g = decorate(scaffold, motif_size, rng);
    MolecularGraph mg = finalize_graph(g.atoms, g.bonds);
    if (!contains_subgraph(mg, motif)) return mg;
  }
  throw Error(
      "synth_generate: could not build a motif-free inactive; "
      "choose a less generic motif");
}

Dataset build_assay(const std::string& prefix, int n_active, int n_inactive,
                    const MolecularGraph& motif,
                    const std::vector<RawGraph>& vocab, Rng& rng) {
  const RawGraph raw_motif = raw_from_graph(motif);
  Dataset out;
  char buf[64];
  for (int i = 0; i < n_active; ++i) {
    CompoundRecord rec;
    std::snprintf(buf, sizeof(buf), "%s-act-%04d", prefix.c_str(), i);
    rec.id = buf;
    const auto& scaffold = vocab[rng.uniform(vocab.size())];
    rec.graph = build_active(raw_motif, scaffold, rng);
    rec.set_label(1);
    out.push_back(std::move(rec));
  }
  for (int i = 0; i < n_inactive; ++i) {
    CompoundRecord rec;
    std::snprintf(buf, sizeof(buf), "%s-ina-%04d", prefix.c_str(), i);
    rec.id = buf;
    const auto& scaffold = vocab[rng.uniform(vocab.size())];
    rec.graph = build_inactive(motif, scaffold, motif.num_atoms(), rng);
    rec.set_label(0);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

namespace {

constexpr int kVocabPerDomain = 8;

std::pair<std::vector<RawGraph>, std::vector<RawGraph>> build_vocabularies(
    Rng& rng, double overlap) {
  const int shared =
      static_cast<int>(std::llround(overlap * kVocabPerDomain));
  const int total = 2 * kVocabPerDomain - shared;
  std::vector<RawGraph> scaffolds;
  scaffolds.reserve(total);
  for (int i = 0; i < total; ++i) scaffolds.push_back(random_scaffold(rng));
  std::vector<RawGraph> source(scaffolds.begin(),
                               scaffolds.begin() + kVocabPerDomain);
  std::vector<RawGraph> target(scaffolds.end() - kVocabPerDomain,
                               scaffolds.end());
  return {std::move(source), std::move(target)};
}

}  // namespace

std::pair<std::vector<MolecularGraph>, std::vector<MolecularGraph>>
synth_vocabularies(std::uint64_t seed, double overlap) {
  Rng rng(seed);
  auto [src, tgt] = build_vocabularies(rng, overlap);
  std::pair<std::vector<MolecularGraph>, std::vector<MolecularGraph>> out;
  for (const auto& g : src)
    out.first.push_back(finalize_graph(g.atoms, g.bonds));
  for (const auto& g : tgt)
    out.second.push_back(finalize_graph(g.atoms, g.bonds));
  return out;
}

SynthPair synth_generate(std::uint64_t seed, int n_active, int n_inactive,
                         const MolecularGraph& motif, double overlap) {
  if (motif.num_atoms() < 2)
    throw Error("synth_generate: motif needs at least 2 atoms");
  if (n_active < 0 || n_inactive < 0)
    throw Error("synth_generate: negative counts");
  if (overlap < 0.0 || overlap > 1.0)
    throw Error("synth_generate: overlap must be in [0, 1]");

  Rng rng(seed);
  auto [source_vocab, target_vocab] = build_vocabularies(rng, overlap);

  SynthPair pair;
  pair.source =
      build_assay("src", n_active, n_inactive, motif, source_vocab, rng);
  pair.target =
      build_assay("tgt", n_active, n_inactive, motif, target_vocab, rng);
  return pair;
}

Dataset synth_generate_ranking(std::uint64_t seed, int n_compounds,
                               const MolecularGraph& motif) {
  if (motif.num_atoms() < 2)
    throw Error("synth_generate_ranking: motif needs at least 2 atoms");
  Rng rng(seed);
  const RawGraph raw_motif = raw_from_graph(motif);
  Dataset out;
  char buf[64];
  // Record i carries i+1 motif copies; activity is that count, so the
  // ground-truth order is realizable from structure alone.
  std::vector<int> copies(n_compounds);
  for (int i = 0; i < n_compounds; ++i) copies[i] = i + 1;
  rng.shuffle(copies);
  for (int i = 0; i < n_compounds; ++i) {
    RawGraph g = random_scaffold(rng);
    for (int c = 0; c < copies[i]; ++c) {
      const int anchor = static_cast<int>(rng.uniform(g.atoms.size()));
      const int off = g.append(raw_motif);
      g.add_bond(anchor, off + static_cast<int>(rng.uniform(
                                   raw_motif.atoms.size())));
    }
    CompoundRecord rec;
    std::snprintf(buf, sizeof(buf), "rank-%04d", i);
    rec.id = buf;
    rec.graph = finalize_graph(g.atoms, g.bonds);
    rec.set_activity(static_cast<double>(copies[i]));
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace moltx
