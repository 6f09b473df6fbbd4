#pragma once

// Flat `key = value` configuration. Lines may carry `#` comments; unknown keys,
// duplicate keys and malformed values raise ConfigError naming the key.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "vsg/dhp.hpp"
#include "vsg/nnpc.hpp"
#include "vsg/plant.hpp"
#include "vsg/scenario.hpp"
#include "vsg/sysid.hpp"

namespace vsg {

struct LineSpec {
  double l_filter = 0.0;  // H
  double l_line = 0.0;    // H
  double r_line = 0.0;    // ohm
};

/// Command dither (V) during identification. Without it the logged command is
/// almost a function of the state and dX'/du is not identified.
inline constexpr double kDefaultInductiveDither = 0.2;
inline constexpr double kDefaultResistiveDither = 1.0;

struct SysIdSettings {
  int n_samples = 10000;
  SysIdTrainOptions train;
  double freq_span = kDefaultFreqSpan;
  ExcitationOptions inductive;
  ExcitationOptions resistive;

  const ExcitationOptions& excitation(GridTag tag) const {
    return tag == GridTag::kInductive ? inductive : resistive;
  }
};

struct Config {
  double dc_voltage = 250.0;       // V; recorded, not used by the averaged model
  double ac_line_voltage = 110.0;  // V, line-to-line RMS
  double frequency = 60.0;         // Hz
  double p_rated = 5000.0;         // W
  LineSpec inductive{1e-6, 100e-6, 0.01};
  LineSpec resistive{1e-6, 1e-6, 0.5};

  double inertia = 0.1;
  double droop_fraction = 0.04;
  double k_i = 5.0;
  double d_v = 0.2;

  DhpConfig dhp;
  double action_band = kDefaultActionBand;
  UtilityWeights weights;
  NnpcConfig nnpc;
  Scenario scenario;
  SysIdSettings sysid;

  GridParams grid(GridTag tag) const;
  SwingParams swing() const;
  AdpScaling scaling(GridTag tag) const;
  PlantSetup plant_setup(GridTag tag) const;
  Scenario scenario_for(GridTag tag) const;
};

/// Defaults with gamma = 1 and the inductive/resistive line data above.
Config default_config();

Config parse_config(std::istream& in, const std::string& source = "<config>");
Config load_config(const std::string& path);

}  // namespace vsg
