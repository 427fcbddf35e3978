#pragma once

#include "dascn/networks.hpp"

#include <json.hpp>

#include <filesystem>

namespace dascn {

// Single-file model archive:
//   8-byte magic "DASCNCK1"
//   u64 little-endian length N of the JSON header
//   N bytes of JSON (network shapes, tensor index, classifier classes, and
//   whatever metadata the caller attaches, e.g. the producing TrainConfig)
//   raw little-endian f64 tensor payload, row-major, at the indexed offsets.
struct Checkpoint {
    ModelParams params;
    nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws LoadError for a missing file, FormatError for a malformed one.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dascn
