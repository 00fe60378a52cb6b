#pragma once

// Checkpoint layout (all integers little-endian):
//
//   magic      8 bytes  "EDNTSCKP"
//   version    u32      1
//   dtype      u32      4 (float32) or 8 (float64)
//   meta       u64 length + UTF-8 JSON (model config and caller metadata)
//   count      u32      number of tensors
//   manifest   per tensor: u32 name length, name bytes, u32 rows, u32 cols
//   payload    per tensor in manifest order, row-major values
//   checksum   u64      FNV-1a over the payload bytes

#include <filesystem>
#include <string>

#include "editnts/autodiff.hpp"
#include "editnts/model.hpp"

namespace editnts {

template <typename Real>
void save_tensors(const std::filesystem::path& path, const ad::ParameterSet<Real>& params,
                  const std::string& meta_json);

/// Loads values into `params`. Throws CheckpointError on a truncated or
/// corrupt file, or when the manifest differs from `params` (names, shapes,
/// dtype). Returns the metadata JSON.
template <typename Real>
std::string load_tensors(const std::filesystem::path& path, ad::ParameterSet<Real>& params);

/// Metadata JSON only.
std::string read_checkpoint_meta(const std::filesystem::path& path);

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& json);

/// Parameters plus the model config under "model" in the metadata.
template <typename Real>
void save_params(const std::filesystem::path& path, const Model<Real>& model,
                 const std::string& extra_meta_json = "{}");

template <typename Real>
void load_params(const std::filesystem::path& path, Model<Real>& model);

/// Builds a model from the config stored in the checkpoint and loads it.
template <typename Real>
Model<Real> load_model(const std::filesystem::path& path);

}  // namespace editnts
