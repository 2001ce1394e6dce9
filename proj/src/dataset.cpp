#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "moltx/molgraph.hpp"

namespace moltx {

namespace {

using nlohmann::json;

MolecularGraph graph_from_json(const json& jg) {
  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;
  for (const auto& ja : jg.at("atoms")) {
    RawAtom a;
    if (ja.contains("element") && ja.at("element").is_string()) {
      const std::string sym = ja.at("element").get<std::string>();
      auto z = element_from_symbol(sym);
      if (!z) throw Error("unknown element symbol: " + sym);
      a.element = *z;
    } else {
      a.element = ja.at("element").get<int>();
    }
    a.formal_charge = ja.value("charge", 0);
    a.aromatic = ja.value("aromatic", false);
    atoms.push_back(a);
  }
  for (const auto& jb : jg.at("bonds")) {
    RawBond b;
    b.u = jb.at("u").get<int>();
    b.v = jb.at("v").get<int>();
    const std::string name = jb.value("order", "single");
    auto order = bond_order_from_name(name);
    if (!order) throw Error("unknown bond order: " + name);
    b.order = *order;
    bonds.push_back(b);
  }
  return finalize_graph(atoms, bonds);
}

json graph_to_json(const MolecularGraph& g) {
  json atoms = json::array();
  for (const auto& a : g.atoms) {
    json ja;
    ja["element"] = a.element;
    if (a.formal_charge != 0) ja["charge"] = a.formal_charge;
    if (a.aromatic) ja["aromatic"] = true;
    atoms.push_back(ja);
  }
  json bonds = json::array();
  for (const auto& b : g.bonds) {
    json jb;
    jb["u"] = b.u;
    jb["v"] = b.v;
    if (b.features.order != BondOrder::kSingle)
      jb["order"] = bond_order_name(b.features.order);
    bonds.push_back(jb);
  }
  return json{{"atoms", atoms}, {"bonds", bonds}};
}

CompoundRecord record_from_json(const json& j, std::size_t line_no) {
  CompoundRecord rec;
  if (!j.contains("id"))
    throw DatasetError("missing \"id\"", line_no);
  rec.id = j.at("id").get<std::string>();
  if (j.contains("smiles")) {
    rec.smiles = j.at("smiles").get<std::string>();
    try {
      rec.graph = parse_smiles(*rec.smiles);
    } catch (const ParseError& e) {
      throw DatasetError("record " + rec.id + ": " + e.what(), line_no);
    }
  } else if (j.contains("graph")) {
    try {
      rec.graph = graph_from_json(j.at("graph"));
    } catch (const std::exception& e) {
      throw DatasetError("record " + rec.id + ": " + e.what(), line_no);
    }
  } else {
    throw DatasetError("record needs \"smiles\" or \"graph\"", line_no);
  }
  if (j.contains("label")) {
    const int y = j.at("label").get<int>();
    if (y != 0 && y != 1)
      throw DatasetError("label must be 0 or 1", line_no);
    rec.set_label(y);
  }
  if (j.contains("activity"))
    rec.set_activity(j.at("activity").get<double>());
  return rec;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& origin) {
  Dataset out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(origin + ": malformed JSON: " + e.what(), line_no);
    }
    CompoundRecord rec = record_from_json(j, line_no);
    if (!ids.insert(rec.id).second) throw DuplicateId(rec.id);
    out.push_back(std::move(rec));
  }
  return out;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset: " + path);
  return parse_dataset(in, path);
}

std::string record_to_json_line(const CompoundRecord& rec) {
  json j;
  j["id"] = rec.id;
  if (rec.smiles) {
    j["smiles"] = *rec.smiles;
  } else {
    j["graph"] = graph_to_json(rec.graph);
  }
  if (rec.has_label()) j["label"] = rec.label();
  if (rec.has_activity()) j["activity"] = rec.activity();
  return j.dump();
}

void save_dataset(const std::string& path, const Dataset& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open dataset for writing: " + path);
  for (const auto& rec : records) out << record_to_json_line(rec) << "\n";
  if (!out) throw Error("dataset write failed: " + path);
}

}  // namespace moltx
