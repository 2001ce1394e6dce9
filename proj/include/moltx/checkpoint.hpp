#pragma once

#include <string>

#include <json.hpp>

#include "moltx/params.hpp"

namespace moltx {

// Checkpoint container: magic, JSON header (user metadata plus the array
// index), then the concatenated row-major f64 payloads in header order.
// Metadata carries the encoder hyperparameters (d, tau, pooling, feature
// widths) so a loaded model is rebuilt with consistent shapes.
struct Checkpoint {
  nlohmann::json meta;
  ParamSet params;
};

void save_checkpoint(const std::string& path, const ParamSet& params,
                     const nlohmann::json& meta);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace moltx
