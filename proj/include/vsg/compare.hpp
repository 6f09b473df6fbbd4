#pragma once

// Controller x grid comparison on the configured schedule.

#include <iosfwd>
#include <string>
#include <vector>

#include "vsg/config.hpp"
#include "vsg/scenario.hpp"

namespace vsg {

struct CompareRow {
  ControllerKind controller = ControllerKind::kPi;
  GridTag grid = GridTag::kInductive;
  Metrics metrics;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  /// Human-readable description of each checked inequality and its outcome.
  std::vector<std::string> checks;
  bool all_hold = true;

  const CompareRow* find(ControllerKind c, GridTag g) const;
};

/// Runs every controller on both grids, writing <controller>_<grid>.csv into
/// out_dir (skipped when empty). Inequalities are only checked for the
/// controllers present:
///   resistive: ISE_Q(dhp) < ISE_Q(pi), ISE_Q(nnpc) < ISE_Q(pi)
///   inductive: ISE_P(dhp) <= ISE_P(pi)
CompareReport run_compare(const Config& config, const std::string& checkpoint_root,
                          const std::vector<ControllerKind>& controllers,
                          const std::string& out_dir);

/// Header: controller,grid,ise_p,ise_q,iae_p,iae_q,max_freq_dev,mean_utility
void write_summary_csv(const CompareReport& report, std::ostream& out);

}  // namespace vsg
