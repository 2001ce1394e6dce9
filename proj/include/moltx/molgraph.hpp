#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moltx/error.hpp"

namespace moltx {

enum class BondOrder : std::uint8_t { kSingle, kDouble, kTriple, kAromatic };

int bond_order_code(BondOrder o);
const char* bond_order_name(BondOrder o);
std::optional<BondOrder> bond_order_from_name(std::string_view name);

// Fixed encoding layout shared by every graph in a run:
//   element one-hot over {H,B,C,N,O,P,S,F,Cl,Br,I} + other  (12)
//   degree one-hot 0..5                                      (6)
//   formal charge one-hot -2..+2                             (5)
//   aromatic flag                                            (1)
//   atomic mass / 100                                        (1)
struct AtomFeatures {
  int element = 6;        // atomic number
  int degree = 0;         // explicit bonds only
  int formal_charge = 0;
  bool aromatic = false;
  double mass_scaled = 0.0;
  std::vector<double> encoded;

  static constexpr int kWidth = 12 + 6 + 5 + 1 + 1;
};

struct BondFeatures {
  BondOrder order = BondOrder::kSingle;
  bool in_ring = false;
  std::vector<double> encoded;

  static constexpr int kWidth = 4 + 1;
};

struct Bond {
  int u = 0;
  int v = 0;
  BondFeatures features;
};

// Directed edge (u -> v); edges 2k and 2k+1 are the two directions of bond
// k, so the reverse of edge e is e ^ 1.
struct DirectedEdge {
  int u = 0;
  int v = 0;
  int bond = 0;
};

struct IncomingEdge {
  int src = 0;   // tail atom
  int edge = 0;  // id of directed edge (src -> this atom)
};

struct MolecularGraph {
  std::vector<AtomFeatures> atoms;
  std::vector<Bond> bonds;
  std::vector<DirectedEdge> directed_edges;
  std::vector<std::vector<IncomingEdge>> incoming;  // per head atom

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }
  int reverse_edge(int e) const { return e ^ 1; }
};

// Pre-featurization description used by the parser, the JSONL loader and the
// synthetic generator; finalize_graph derives degrees, ring membership,
// encodings and the directed-edge index.
struct RawAtom {
  int element = 6;
  int formal_charge = 0;
  bool aromatic = false;
};

struct RawBond {
  int u = 0;
  int v = 0;
  BondOrder order = BondOrder::kSingle;
};

MolecularGraph finalize_graph(const std::vector<RawAtom>& atoms,
                              const std::vector<RawBond>& bonds);

double atomic_mass(int element);
std::optional<int> element_from_symbol(std::string_view symbol);
const char* element_symbol(int element);

// Supported subset: organic-subset atoms B C N O P S F Cl Br I, aromatic
// b c n o p s, bond symbols - = #, branches, ring closures 1-9 and %nn,
// bracket atoms [symbol, Hn, charge]. Implicit hydrogens are not
// materialized; an unwritten bond between two aromatic atoms is aromatic,
// otherwise single.
MolecularGraph parse_smiles(const std::string& smiles);

struct CompoundRecord {
  std::string id;
  MolecularGraph graph;
  std::optional<std::string> smiles;

  bool has_label() const { return label_.has_value(); }
  bool has_activity() const { return activity_.has_value(); }
  int label() const {
    if (!label_) throw Error("record " + id + " has no label");
    return *label_;
  }
  double activity() const {
    if (!activity_) throw Error("record " + id + " has no activity");
    return *activity_;
  }
  void set_label(int y) { label_ = y; }
  void set_activity(double a) { activity_ = a; }
  void clear_label() { label_.reset(); }

 private:
  std::optional<int> label_;
  std::optional<double> activity_;
};

using Dataset = std::vector<CompoundRecord>;

// JSON-Lines: every line needs "id", one of "smiles" | "graph", and may
// carry "label" and/or "activity".
Dataset load_dataset(const std::string& path);
Dataset parse_dataset(std::istream& in, const std::string& origin);
void save_dataset(const std::string& path, const Dataset& records);
std::string record_to_json_line(const CompoundRecord& rec);

// True when `motif` embeds into `g` as a subgraph with matching element /
// aromatic / charge atom labels and matching bond orders.
bool contains_subgraph(const MolecularGraph& g, const MolecularGraph& motif);

// Deterministic benchmark pair: actives of both assays carry `motif`
// attached to random scaffolds, inactives are motif-free; `overlap` is the
// fraction of scaffold vocabulary shared between source and target.
struct SynthPair {
  Dataset source;
  Dataset target;
};

SynthPair synth_generate(std::uint64_t seed, int n_active, int n_inactive,
                         const MolecularGraph& motif, double overlap);

// The scaffold vocabularies synth_generate(seed, ..., overlap) draws from,
// exposed so the sharing contract is checkable.
std::pair<std::vector<MolecularGraph>, std::vector<MolecularGraph>>
synth_vocabularies(std::uint64_t seed, double overlap);

// Ranking benchmark: activity is an affine function of how many motif
// copies each compound carries (all activities distinct).
Dataset synth_generate_ranking(std::uint64_t seed, int n_compounds,
                               const MolecularGraph& motif);

}  // namespace moltx
