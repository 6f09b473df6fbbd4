#include "vsg/checkpoints.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "vsg/errors.hpp"
#include "vsg/scenario.hpp"

namespace vsg {

namespace fs = std::filesystem;

void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest '" + path + "'");
  out << "DHPMANIFEST 1\n"
      << "grid " << grid_tag_name(m.grid) << "\n"
      << "action " << m.action << "\n"
      << "critic " << m.critic << "\n"
      << "model " << m.model << "\n"
      << "gamma " << format_double(m.gamma) << "\n"
      << "weights " << format_double(m.weights.k_p) << " " << format_double(m.weights.k_q) << " "
      << format_double(m.weights.k_f) << "\n"
      << "seed " << m.seed << "\n";
  if (!out) throw ConfigError("failed writing manifest '" + path + "'");
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path + "'");
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "DHPMANIFEST" || version != 1) {
    throw ConfigError("'" + path + "' is not a version-1 manifest");
  }
  Manifest m;
  std::string key;
  bool have[7] = {};
  while (in >> key) {
    if (key == "grid") {
      std::string g;
      in >> g;
      m.grid = parse_grid_tag(g);
      have[0] = true;
    } else if (key == "action") {
      in >> m.action;
      have[1] = true;
    } else if (key == "critic") {
      in >> m.critic;
      have[2] = true;
    } else if (key == "model") {
      in >> m.model;
      have[3] = true;
    } else if (key == "gamma") {
      in >> m.gamma;
      have[4] = true;
    } else if (key == "weights") {
      in >> m.weights.k_p >> m.weights.k_q >> m.weights.k_f;
      have[5] = true;
    } else if (key == "seed") {
      in >> m.seed;
      have[6] = true;
    } else {
      throw ConfigError("manifest '" + path + "': unknown entry '" + key + "'");
    }
    if (!in) throw ConfigError("manifest '" + path + "': bad value for '" + key + "'");
  }
  for (bool h : have) {
    if (!h) throw ConfigError("manifest '" + path + "' is incomplete");
  }
  return m;
}

DhpCheckpoint load_dhp_checkpoint(const std::string& dir) {
  const fs::path base(dir);
  DhpCheckpoint ck;
  ck.manifest = read_manifest((base / kManifestFile).string());
  ck.model = load_mlp_file((base / ck.manifest.model).string());
  ck.action = load_mlp_file((base / ck.manifest.action).string());
  ck.critic = load_mlp_file((base / ck.manifest.critic).string());
  return ck;
}

std::string grid_checkpoint_dir(const std::string& root, GridTag grid) {
  return (fs::path(root) / std::string(grid_tag_name(grid))).string();
}

}  // namespace vsg
