#pragma once

// Trained-controller directories: <root>/<grid>/{sysid.mlp, action.mlp,
// critic.mlp, manifest.txt, training_log.csv}.

#include <cstdint>
#include <string>

#include "vsg/dhp.hpp"
#include "vsg/mlp.hpp"
#include "vsg/sysid.hpp"

namespace vsg {

inline constexpr const char* kModelFile = "sysid.mlp";
inline constexpr const char* kActionFile = "action.mlp";
inline constexpr const char* kCriticFile = "critic.mlp";
inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kTrainingLogFile = "training_log.csv";

struct Manifest {
  GridTag grid = GridTag::kInductive;
  std::string action = kActionFile;
  std::string critic = kCriticFile;
  std::string model = kModelFile;
  double gamma = 1.0;
  UtilityWeights weights;
  std::uint64_t seed = 0;
};

/// Line-oriented: `DHPMANIFEST 1`, then `grid`, `action`, `critic`, `model`,
/// `gamma`, `weights kp kq kf`, `seed`. File names are relative to the
/// manifest's directory.
void write_manifest(const Manifest& m, const std::string& path);
Manifest read_manifest(const std::string& path);

struct DhpCheckpoint {
  Manifest manifest;
  Mlp model;
  Mlp action;
  Mlp critic;
};

DhpCheckpoint load_dhp_checkpoint(const std::string& dir);

/// Directory holding the networks for one grid under a checkpoint root.
std::string grid_checkpoint_dir(const std::string& root, GridTag grid);

}  // namespace vsg
