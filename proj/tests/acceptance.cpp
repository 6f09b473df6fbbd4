// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lqr_toy.hpp"
#include "test_support.hpp"
#include "vsg/compare.hpp"
#include "vsg/config.hpp"
#include "vsg/gradcheck.hpp"
#include "vsg/plant.hpp"
#include "vsg/sysid.hpp"

using namespace vsg;
using namespace vsg::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kSpotTol = 1e-9;
constexpr double kApproxTol = 0.05;
constexpr double kLinearTol = 1e-3;
constexpr double kMlpGradTol = 1e-5;
constexpr double kModelJacTol = 1e-4;
constexpr double kCriticTol = 0.02;
constexpr double kActionTol = 0.05;
constexpr double kSysidTol = 0.05;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void run(int id, const char* name, double max_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (max_seconds > 0 && secs > max_seconds) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(max_seconds)) + " s budget";
  }
  if (!o.pass) ++g_failures;
  std::printf("%s criterion %d: %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

long double oracle_p(long double e, long double v, long double d, long double r, long double x) {
  const long double z2 = r * r + x * x;
  return 0.5L * ((e * e - e * v * std::cos(d)) / z2 * r + e * v / z2 * std::sin(d) * x);
}

long double oracle_q(long double e, long double v, long double d, long double r, long double x) {
  const long double z2 = r * r + x * x;
  return 0.5L * ((e * e - e * v * std::cos(d)) / z2 * x - e * v / z2 * std::sin(d) * r);
}

Outcome power_flow() {
  Outcome o;
  const GridParams g = default_config().grid(GridTag::kInductive);
  const double v = g.v_grid_peak, r = g.r_eq(), x = g.x_eq();

  bool zeros = true;
  for (double rr : {0.0, 0.01, 0.5})
    for (double xx : {7.54e-4, 0.038, 1.0}) {
      const PowerPair pq = exact_power_flow(v, v, 0.0, rr, xx);
      zeros = zeros && pq.p == 0.0 && pq.q == 0.0;
    }
  zeros = zeros && approx_power_flow_inductive(v, v, 0.0, x).p == 0.0 &&
          linearized_power_flow(v, v, 0.0, x).q == 0.0;

  double spot = 0.0;
  struct Case {
    double e, v, d, r, x;
  };
  for (const Case& c : {Case{89.81, 89.81, 0.02, 0.01, 0.03807}, Case{90.0, 89.81, 0.0, 0.5, 7.54e-4},
                        Case{v, v, 0.02, r, x}, Case{93.0, v, -0.03, 0.5, 7.54e-4}}) {
    const PowerPair pq = exact_power_flow(c.e, c.v, c.d, c.r, c.x);
    spot = std::max(spot, rel_err(pq.p, static_cast<double>(oracle_p(c.e, c.v, c.d, c.r, c.x))));
    spot = std::max(spot, rel_err(pq.q, static_cast<double>(oracle_q(c.e, c.v, c.d, c.r, c.x))));
  }

  // Lossless approximation against the exact formula on the grid's own line.
  double approx = 0.0;
  for (double d = -0.05; d <= 0.05 + 1e-12; d += 0.005) {
    const double pe = exact_power_flow(v, v, d, r, x).p;
    const double pa = approx_power_flow_inductive(v, v, d, x).p;
    approx = std::max(approx, std::abs(pe - pa) / std::max(std::abs(pe), 1.0));
  }

  // Same sweep with R cut to X/100, reported for context only.
  double approx_high = 0.0;
  for (double d = -0.05; d <= 0.05 + 1e-12; d += 0.005) {
    const double pe = exact_power_flow(v, v, d, x / 100.0, x).p;
    const double pa = approx_power_flow_inductive(v, v, d, x).p;
    approx_high = std::max(approx_high, std::abs(pe - pa) / std::max(std::abs(pe), 1.0));
  }

  double lin = 0.0;
  for (double d = -0.02; d <= 0.02 + 1e-12; d += 0.001) {
    if (std::abs(d) < 1e-9) continue;
    const double pa = approx_power_flow_inductive(v, v, d, x).p;
    lin = std::max(lin, std::abs(linearized_power_flow(v, v, d, x).p - pa) / std::abs(pa));
  }

  o.pass = zeros && spot <= kSpotTol && approx <= kApproxTol && lin <= kLinearTol;
  o.detail = std::string("zero cases ") + (zeros ? "exact" : "NOT exact") + ", spot rel err " +
             fmt("%.2e", spot) + " <= 1e-9, lossless gap at X/R=" + fmt("%.2f", x / r) + " " +
             fmt("%.4f", approx) + " <= 0.05 (at X/R=100: " + fmt("%.4f", approx_high) +
             "), linearized gap " + fmt("%.2e", lin) + " <= 1e-3";
  return o;
}

Outcome gradients() {
  const GradcheckReport rep = check_mlp_gradients(100, 2024);
  const double model = check_model_jacobians(default_config().scaling(GridTag::kInductive), 20, 2024);
  Outcome o;
  o.pass = rep.cases == 100 && rep.max_weight_error <= kMlpGradTol &&
           rep.max_jacobian_error <= kMlpGradTol && model <= kModelJacTol;
  o.detail = "100 nets: backward " + fmt("%.2e", rep.max_weight_error) + ", input_jacobian " +
             fmt("%.2e", rep.max_jacobian_error) + " <= 1e-5; model_jacobians " +
             fmt("%.2e", model) + " <= 1e-4";
  return o;
}

Outcome lqr() {
  const LqrToy t;
  const double p = riccati_p(t), k = lqr_gain(t);
  LqrNets n = make_lqr_nets(t, 1);
  train_lqr(n, t, 200000, 0.1, 0.05, 1.0, 1);
  double ce = 0.0, ae = 0.0;
  for (int i = -50; i <= 50; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, t.x_range * i / 50.0);
    ce = std::max(ce, std::abs(evaluate(n.critic, x)(0) - 2 * p * x(0)) / (2 * p * t.x_range));
    ae = std::max(ae, std::abs(evaluate(n.action, x)(0) + k * x(0)) / (2 * t.u_max));
  }
  Outcome o;
  o.pass = ce <= kCriticTol && ae <= kActionTol;
  o.detail = "P*=" + fmt("%.6f", p) + " K=" + fmt("%.6f", k) + ", critic err " + fmt("%.4f", ce) +
             " <= 0.02 of max costate, action err " + fmt("%.4f", ae) + " <= 0.05 of range";
  return o;
}

Outcome sysid() {
  const Config c = default_config();
  Outcome o;
  std::string detail;
  for (GridTag g : {GridTag::kInductive, GridTag::kResistive}) {
    const SysIdDataset a = generate_dataset(c.grid(g), c.swing(), 10000, 1, g, c.sysid.excitation(g));
    const SysIdDataset b = generate_dataset(c.grid(g), c.swing(), 10000, 1, g, c.sysid.excitation(g));
    std::ostringstream sa, sb;
    write_dataset_csv(a, sa);
    write_dataset_csv(b, sb);
    const bool same = sa.str() == sb.str();
    SysIdTrainOptions opts = c.sysid.train;
    opts.shuffle_seed = 1;
    const SysIdFit fit = train_sysid(make_system_network(c.scaling(g), 1), a, opts);
    const double worst = normalized_rmse(fit.net, a, fit.holdout_indices).maxCoeff();
    o.pass = o.pass && same && a.samples.size() == 10000 && worst <= kSysidTol;
    detail += std::string(detail.empty() ? "" : ", ") + std::string(grid_tag_name(g)) +
              " max nRMSE " + fmt("%.4f", worst) + (same ? " reproducible" : " NOT reproducible");
  }
  o.detail = detail + ", bound 0.05";
  return o;
}

Outcome comparison() {
  const std::string root = VSG_SOURCE_DIR;
  const Config c = load_config(root + "/configs/desk.conf");
  const CompareReport r = run_compare(
      c, root + "/checkpoints", {ControllerKind::kPi, ControllerKind::kNnpc, ControllerKind::kDhp}, "");
  Outcome o;
  o.pass = r.all_hold && r.checks.size() == 3;
  for (const auto& s : r.checks) o.detail += (o.detail.empty() ? "" : "; ") + s;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool sh(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0; }

/// Every CLI command once into `dir` on a reduced config.
bool pipeline(const fs::path& dir, const fs::path& conf) {
  const std::string cli = VSG_CLI;
  const std::string c = " --config " + conf.string();
  bool ok = true;
  for (const char* g : {"inductive", "resistive"}) {
    const fs::path gd = dir / "ck" / g;
    ok = ok && sh(cli + " train-sysid" + c + " --seed 3 --grid " + g + " --out " +
                  (gd / "sysid.mlp").string() + " --dataset " + (dir / (std::string(g) + "_data.csv")).string());
    ok = ok && sh(cli + " train-dhp" + c + " --seed 3 --grid " + g + " --sysid " +
                  (gd / "sysid.mlp").string() + " --out " + gd.string());
    for (const char* ctl : {"pi", "nnpc", "dhp"}) {
      ok = ok && sh(cli + " simulate" + c + " --controller " + ctl + " --grid " + g +
                    " --checkpoints " + (dir / "ck").string() + " --out " + (dir / "sim").string());
    }
  }
  // Exit status reflects the inequalities, which a reduced run need not meet.
  sh(cli + " compare" + c + " --checkpoints " + (dir / "ck").string() + " --out " + (dir / "cmp").string());
  ok = ok && fs::exists(dir / "cmp" / "summary.csv");
  return ok;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "vsg_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path conf = base / "reduced.conf";
  std::ofstream(conf) << "sysid.n_samples = 2000\nsysid.epochs = 5\n"
                         "dhp.gamma = 0.95\ndhp.episodes = 3\ndhp.steps_per_episode = 500\n"
                         "dhp.exploration = 0.1\nscenario.duration = 4\n"
                         "scenario.schedule = 0:2000:0, 2:4000:1000\n";
  Outcome o;
  if (!pipeline(base / "a", conf) || !pipeline(base / "b", conf)) {
    return {false, "a CLI command failed"};
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), base / "a");
    ++files;
    if (slurp(e.path()) != slurp(base / "b" / rel)) {
      ++differ;
      o.detail += rel.string() + " differs; ";
    }
  }
  o.pass = differ == 0 && files >= 16;
  o.detail += std::to_string(files) + " output files from train-sysid, train-dhp, simulate, compare; " +
              std::to_string(differ) + " differ";
  fs::remove_all(base);
  return o;
}

}  // namespace

int main() {
  run(1, "power-flow oracle suite", 1.0, power_flow);
  run(2, "gradient suite", 10.0, gradients);
  run(3, "LQR oracle", 60.0, lqr);
  run(4, "system identification", 60.0, sysid);
  run(5, "comparative claim on committed checkpoints", 120.0, comparison);
  run(6, "CLI determinism", 0.0, determinism);
  std::printf("%d of 6 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
