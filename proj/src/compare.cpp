#include "vsg/compare.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "vsg/checkpoints.hpp"
#include "vsg/errors.hpp"

namespace vsg {

namespace fs = std::filesystem;

const CompareRow* CompareReport::find(ControllerKind c, GridTag g) const {
  for (const auto& r : rows) {
    if (r.controller == c && r.grid == g) return &r;
  }
  return nullptr;
}

namespace {

ControllerAssets load_assets(ControllerKind c, const std::string& root, GridTag grid) {
  ControllerAssets assets;
  const fs::path dir = grid_checkpoint_dir(root, grid);
  if (c == ControllerKind::kNnpc) {
    assets.model = load_mlp_file((dir / kModelFile).string());
  } else if (c == ControllerKind::kDhp) {
    assets.action = load_dhp_checkpoint(dir.string()).action;
  }
  return assets;
}

void check(CompareReport& rep, const std::string& what, double lhs, double rhs, bool strict) {
  const bool ok = strict ? lhs < rhs : lhs <= rhs;
  rep.checks.push_back(what + ": " + format_double(lhs) + (strict ? " < " : " <= ") +
                       format_double(rhs) + (ok ? " holds" : " FAILS"));
  rep.all_hold = rep.all_hold && ok;
}

}  // namespace

CompareReport run_compare(const Config& config, const std::string& checkpoint_root,
                          const std::vector<ControllerKind>& controllers,
                          const std::string& out_dir) {
  CompareReport rep;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  for (GridTag grid : {GridTag::kInductive, GridTag::kResistive}) {
    const Scenario scenario = config.scenario_for(grid);
    const PlantSetup setup = config.plant_setup(grid);
    for (ControllerKind c : controllers) {
      const Trajectory traj =
          run_scenario(c, scenario, setup, load_assets(c, checkpoint_root, grid));
      if (!out_dir.empty()) {
        const fs::path path = fs::path(out_dir) / (std::string(controller_name(c)) + "_" +
                                                   std::string(grid_tag_name(grid)) + ".csv");
        std::ofstream out(path);
        if (!out) throw SimulationError("cannot write '" + path.string() + "'");
        write_trajectory_csv(traj, out);
      }
      rep.rows.push_back({c, grid, compute_metrics(traj)});
    }
  }
  const CompareRow* pi_r = rep.find(ControllerKind::kPi, GridTag::kResistive);
  const CompareRow* pi_i = rep.find(ControllerKind::kPi, GridTag::kInductive);
  if (pi_r != nullptr) {
    if (const auto* d = rep.find(ControllerKind::kDhp, GridTag::kResistive)) {
      check(rep, "resistive ISE_Q dhp < pi", d->metrics.ise_q, pi_r->metrics.ise_q, true);
    }
    if (const auto* n = rep.find(ControllerKind::kNnpc, GridTag::kResistive)) {
      check(rep, "resistive ISE_Q nnpc < pi", n->metrics.ise_q, pi_r->metrics.ise_q, true);
    }
  }
  if (pi_i != nullptr) {
    if (const auto* d = rep.find(ControllerKind::kDhp, GridTag::kInductive)) {
      check(rep, "inductive ISE_P dhp <= pi", d->metrics.ise_p, pi_i->metrics.ise_p, false);
    }
  }
  return rep;
}

void write_summary_csv(const CompareReport& report, std::ostream& out) {
  out << "controller,grid,ise_p,ise_q,iae_p,iae_q,max_freq_dev,mean_utility\n";
  for (const auto& r : report.rows) {
    const Metrics& m = r.metrics;
    out << controller_name(r.controller) << ',' << grid_tag_name(r.grid) << ','
        << format_double(m.ise_p) << ',' << format_double(m.ise_q) << ','
        << format_double(m.iae_p) << ',' << format_double(m.iae_q) << ','
        << format_double(m.max_freq_dev) << ',' << format_double(m.mean_utility) << '\n';
  }
}

}  // namespace vsg
