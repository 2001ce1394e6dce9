#include "moltx/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "moltx/error.hpp"

namespace moltx {

namespace {
constexpr char kMagic[8] = {'M', 'O', 'L', 'T', 'C', 'K', '1', '\n'};
}

void save_checkpoint(const std::string& path, const ParamSet& params,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  header["meta"] = meta;
  nlohmann::json arrays = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = params[i];
    arrays.push_back({{"name", params.names()[i]},
                      {"rows", p.value.rows},
                      {"cols", p.value.cols},
                      {"offset", offset}});
    offset += p.value.v.size();
  }
  header["arrays"] = arrays;
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& v = params[i].value.v;
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw Error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("not a checkpoint file: " + path);
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw Error("truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(hs);

  Checkpoint ck;
  ck.meta = header.at("meta");
  for (const auto& a : header.at("arrays")) {
    const int rows = a.at("rows").get<int>();
    const int cols = a.at("cols").get<int>();
    Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (!in) throw Error("truncated checkpoint payload: " + path);
    ck.params.add(a.at("name").get<std::string>(), std::move(t));
  }
  return ck;
}

}  // namespace moltx
