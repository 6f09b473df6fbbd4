#pragma once

// Closed-loop scenario execution, trajectory records and tracking metrics.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vsg/adp_state.hpp"
#include "vsg/dhp.hpp"
#include "vsg/mlp.hpp"
#include "vsg/nnpc.hpp"
#include "vsg/plant.hpp"
#include "vsg/sysid.hpp"

namespace vsg {

struct SchedulePoint {
  double t_start = 0.0;  // s
  double p_set = 0.0;    // W, three-phase
  double q_set = 0.0;    // var, three-phase
};

/// "t:p:q, t:p:q, ..." (whitespace ignored).
std::vector<SchedulePoint> parse_schedule(std::string_view text);
std::string format_schedule(const std::vector<SchedulePoint>& schedule);

struct Scenario {
  GridTag grid_tag = GridTag::kInductive;
  std::vector<SchedulePoint> schedule;
  double duration = 20.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;

  void validate() const;
  std::int64_t num_steps() const;
  /// References in force during control period k. A schedule point starting at
  /// t takes effect at period round(t / dt).
  References refs_at_step(std::int64_t k) const;
};

std::vector<SchedulePoint> default_schedule();

struct TrajectoryRow {
  double t = 0.0;
  double p = 0.0;  // W, three-phase
  double q = 0.0;  // var, three-phase
  double f = 0.0;  // Hz
  double e = 0.0;  // V, applied command
  double delta = 0.0;
  double p_set = 0.0;
  double q_set = 0.0;
  double u = 0.0;  // utility of the row's state
};

struct Trajectory {
  double dt = 1e-3;
  double f_nominal = 60.0;
  std::vector<TrajectoryRow> rows;
};

struct Metrics {
  double ise_p = 0.0;
  double ise_q = 0.0;
  double iae_p = 0.0;
  double iae_q = 0.0;
  double max_freq_dev = 0.0;
  double mean_utility = 0.0;
};

enum class ControllerKind { kPi, kNnpc, kDhp };
std::string_view controller_name(ControllerKind c);
ControllerKind parse_controller(std::string_view name);

struct PlantSetup {
  GridParams grid;
  SwingParams swing;
  UtilityWeights weights;
  NnpcConfig nnpc;
};

/// Networks needed by the learned controllers: nnpc uses `model`, dhp uses
/// `action`.
struct ControllerAssets {
  std::optional<Mlp> model;
  std::optional<Mlp> action;
};

/// Per period k: refs = refs_at_step(k), controller computes E from the
/// current state, plant_step, then a row with t = k*dt holding the new state.
/// Throws SimulationError with the step index if the state goes non-finite,
/// InvalidParameter if a required network is missing.
Trajectory run_scenario(ControllerKind controller, const Scenario& scenario,
                        const PlantSetup& setup, const ControllerAssets& assets);

/// Throws InvalidParameter for an empty trajectory.
Metrics compute_metrics(const Trajectory& traj);

/// Header: t,P,Q,f,E,delta,Pset,Qset,U
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Writes `value` with 17 significant digits.
std::string format_double(double value);

}  // namespace vsg
