// Command-line front end: simulate, train-sysid, train-dhp, compare, gradcheck.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vsg/checkpoints.hpp"
#include "vsg/compare.hpp"
#include "vsg/config.hpp"
#include "vsg/dhp.hpp"
#include "vsg/gradcheck.hpp"
#include "vsg/random.hpp"
#include "vsg/scenario.hpp"
#include "vsg/sysid.hpp"

namespace fs = std::filesystem;
using namespace vsg;

namespace {

constexpr double kGradTolerance = 1e-5;
constexpr double kModelJacobianTolerance = 1e-4;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

Config config_or_default(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

std::vector<ControllerKind> parse_controllers(const std::string& list) {
  std::vector<ControllerKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_controller(item));
  }
  if (out.empty()) throw std::runtime_error("empty controller list");
  return out;
}

int cmd_simulate(const std::string& controller, const std::string& grid_name,
                 const std::string& config_path, const std::string& out_dir,
                 const std::string& ckpt_root) {
  const Config cfg = config_or_default(config_path);
  const ControllerKind c = parse_controller(controller);
  const GridTag grid = parse_grid_tag(grid_name);
  ControllerAssets assets;
  const std::string dir = grid_checkpoint_dir(ckpt_root, grid);
  if (c == ControllerKind::kNnpc) assets.model = load_mlp_file((fs::path(dir) / kModelFile).string());
  if (c == ControllerKind::kDhp) assets.action = load_dhp_checkpoint(dir).action;
  const Trajectory traj = run_scenario(c, cfg.scenario_for(grid), cfg.plant_setup(grid), assets);
  const fs::path path = fs::path(out_dir) / (controller + "_" + grid_name + ".csv");
  auto out = open_out(path);
  write_trajectory_csv(traj, out);
  if (!traj.rows.empty()) {
    const Metrics m = compute_metrics(traj);
    std::printf("%s %s: ise_p=%.6g ise_q=%.6g max_freq_dev=%.6g -> %s\n", controller.c_str(),
                grid_name.c_str(), m.ise_p, m.ise_q, m.max_freq_dev, path.string().c_str());
  }
  return 0;
}

int cmd_train_sysid(const std::string& config_path, std::uint64_t seed, const std::string& out_path,
                    const std::string& grid_name, const std::string& dataset_path) {
  const Config cfg = config_or_default(config_path);
  const GridTag grid = parse_grid_tag(grid_name);
  const auto t0 = std::chrono::steady_clock::now();
  const SysIdDataset data = generate_dataset(cfg.grid(grid), cfg.swing(), cfg.sysid.n_samples, seed,
                                             grid, cfg.sysid.excitation(grid), cfg.scenario.dt);
  if (!dataset_path.empty()) {
    auto out = open_out(dataset_path);
    write_dataset_csv(data, out);
  }
  SysIdTrainOptions opts = cfg.sysid.train;
  opts.shuffle_seed = seed;
  const SysIdFit fit = train_sysid(make_system_network(cfg.scaling(grid), seed), data, opts);
  const AdpVector rmse = normalized_rmse(fit.net, data, fit.holdout_indices);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
  save_mlp_file(fit.net, out_path);
  std::printf("holdout normalized RMSE:");
  for (int i = 0; i < kAdpStateSize; ++i) std::printf(" %.4g", rmse(i));
  std::printf("  (%.1f s) -> %s\n", secs, out_path.c_str());
  return 0;
}

int cmd_train_dhp(const std::string& config_path, const std::string& sysid_path, std::uint64_t seed,
                  const std::string& out_dir, const std::string& grid_name) {
  const Config cfg = config_or_default(config_path);
  const GridTag grid = parse_grid_tag(grid_name);
  DhpProblem problem;
  problem.grid = cfg.grid(grid);
  problem.swing = cfg.swing();
  problem.scaling = cfg.scaling(grid);
  problem.model = load_mlp_file(sysid_path);
  problem.weights = cfg.weights;
  problem.references = cfg.sysid.excitation(grid);
  problem.dt = cfg.scenario.dt;

  Rng seeds(seed);
  const std::uint64_t action_seed = seeds.next();
  const std::uint64_t critic_seed = seeds.next();
  const std::uint64_t train_seed = seeds.next();
  const auto t0 = std::chrono::steady_clock::now();
  const DhpTrainResult res =
      train_dhp(make_action_network(problem.scaling, action_seed, cfg.action_band),
                make_critic_network(problem.scaling, cfg.dhp.gamma, critic_seed), problem, cfg.dhp,
                train_seed);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  save_mlp_file(res.action, (dir / kActionFile).string());
  save_mlp_file(res.critic, (dir / kCriticFile).string());
  if (!fs::exists(dir / kModelFile) || !fs::equivalent(dir / kModelFile, sysid_path)) {
    save_mlp_file(problem.model, (dir / kModelFile).string());
  }
  Manifest m;
  m.grid = grid;
  m.gamma = cfg.dhp.gamma;
  m.weights = cfg.weights;
  m.seed = seed;
  write_manifest(m, (dir / kManifestFile).string());
  auto log = open_out(dir / kTrainingLogFile);
  write_training_log_csv(res.log, log);
  if (!res.log.empty()) {
    std::printf("episodes=%zu first mean U=%.6g last mean U=%.6g (%.1f s) -> %s\n",
                res.log.size(), res.log.front().mean_utility, res.log.back().mean_utility, secs,
                out_dir.c_str());
  }
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& ckpt_root,
                const std::string& out_dir, const std::string& controllers) {
  const Config cfg = config_or_default(config_path);
  const CompareReport rep = run_compare(cfg, ckpt_root, parse_controllers(controllers), out_dir);
  auto out = open_out(fs::path(out_dir) / "summary.csv");
  write_summary_csv(rep, out);
  for (const auto& r : rep.rows) {
    std::printf("%-5s %-9s ise_p=%-12.6g ise_q=%-12.6g max_freq_dev=%.4g\n",
                std::string(controller_name(r.controller)).c_str(),
                std::string(grid_tag_name(r.grid)).c_str(), r.metrics.ise_p, r.metrics.ise_q,
                r.metrics.max_freq_dev);
  }
  for (const auto& c : rep.checks) std::printf("%s\n", c.c_str());
  return rep.all_hold ? 0 : 1;
}

int cmd_gradcheck(std::uint64_t seed) {
  const GradcheckReport rep = check_mlp_gradients(100, seed);
  const Config cfg = default_config();
  double model_err = 0.0;
  for (GridTag g : {GridTag::kInductive, GridTag::kResistive}) {
    model_err = std::max(model_err, check_model_jacobians(cfg.scaling(g), 20, seed));
  }
  const bool ok = rep.max_weight_error <= kGradTolerance &&
                  rep.max_jacobian_error <= kGradTolerance && model_err <= kModelJacobianTolerance;
  std::printf("mlp backward: %d nets, max rel err %.3g\n", rep.cases, rep.max_weight_error);
  std::printf("mlp input_jacobian: max rel err %.3g\n", rep.max_jacobian_error);
  std::printf("model_jacobians: max rel err %.3g\n", model_err);
  std::printf("%s\n", ok ? "gradcheck passed" : "gradcheck FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronverter DHP simulator and training harness"};
  app.require_subcommand(1);

  std::string controller, grid = "inductive", config, out, ckpt = "checkpoints";
  std::string sysid, dataset, controllers = "pi,nnpc,dhp";
  std::uint64_t seed = 1;

  auto* sim = app.add_subcommand("simulate", "run one controller on one grid");
  sim->add_option("--controller", controller)->required()->check(CLI::IsMember({"pi", "nnpc", "dhp"}));
  sim->add_option("--grid", grid)->check(CLI::IsMember({"inductive", "resistive"}));
  sim->add_option("--config", config);
  sim->add_option("--out", out)->required();
  sim->add_option("--checkpoints", ckpt, "checkpoint root");

  auto* tsys = app.add_subcommand("train-sysid", "generate data and fit the model network");
  tsys->add_option("--config", config);
  tsys->add_option("--seed", seed);
  tsys->add_option("--out", out, "checkpoint file")->required();
  tsys->add_option("--grid", grid)->check(CLI::IsMember({"inductive", "resistive"}));
  tsys->add_option("--dataset", dataset, "also write the dataset CSV");

  auto* tdhp = app.add_subcommand("train-dhp", "train critic and action networks");
  tdhp->add_option("--config", config);
  tdhp->add_option("--sysid", sysid)->required();
  tdhp->add_option("--seed", seed);
  tdhp->add_option("--out", out, "checkpoint directory")->required();
  tdhp->add_option("--grid", grid)->check(CLI::IsMember({"inductive", "resistive"}));

  auto* cmp = app.add_subcommand("compare", "all controllers on both grids");
  cmp->add_option("--config", config);
  cmp->add_option("--checkpoints", ckpt, "checkpoint root");
  cmp->add_option("--out", out)->required();
  cmp->add_option("--controllers", controllers, "comma-separated subset of pi,nnpc,dhp");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference checks of network derivatives");
  gc->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(controller, grid, config, out, ckpt);
    if (*tsys) return cmd_train_sysid(config, seed, out, grid, dataset);
    if (*tdhp) return cmd_train_dhp(config, sysid, seed, out, grid);
    if (*cmp) return cmd_compare(config, ckpt, out, controllers);
    if (*gc) return cmd_gradcheck(seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
