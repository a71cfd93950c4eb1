// Copyright 2026 The resloco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// resloco command-line tool.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime error,
// 4 one or more simulator faults (results are still written).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "resloco/binio.hpp"
#include "resloco/config.hpp"
#include "resloco/episode.hpp"
#include "resloco/eval.hpp"
#include "resloco/kernel.hpp"
#include "resloco/residual.hpp"

namespace fs = std::filesystem;
using namespace resloco;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitSimFault = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON configuration file");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output path");
}

AppConfig resolve(const Common& c) {
  AppConfig cfg = default_config();
  if (!c.config.empty()) load_config_file(cfg, c.config);
  apply_environment(cfg);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  return cfg;
}

fs::path output_path(const Common& c, const AppConfig& cfg, const std::string& fallback) {
  const fs::path p = c.out.empty() ? fs::path(cfg.out_dir) / fallback : fs::path(c.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

fs::path sibling(const fs::path& p, const std::string& suffix) { return p.parent_path() / (p.stem().string() + suffix); }

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void manifest(const fs::path& out, const std::string& cmd, const std::vector<std::string>& args,
              const AppConfig& cfg) {
  write_manifest((out.parent_path() / ("manifest-" + cmd + ".json")).string(), cmd, args, cfg);
}

std::vector<double> parse_grid(const std::string& s) {
  if (s.empty()) throw UsageError("empty grid");
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::vector<double> p;
      std::stringstream ss(s);
      for (std::string tok; std::getline(ss, tok, ':');) p.push_back(std::stod(tok));
      if (p.size() != 3 || !(p[2] > 0.0) || p[1] < p[0]) throw UsageError("grid must be start:stop:step with step > 0");
      const auto n = static_cast<long>(std::floor((p[1] - p[0]) / p[2] + 1e-9));
      for (long k = 0; k <= n; ++k) out.push_back(p[0] + static_cast<double>(k) * p[2]);
    } else {
      std::stringstream ss(s);
      for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw UsageError("cannot parse grid '" + s + "'");
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::stringstream ss(s);
  try {
    for (std::string tok; std::getline(ss, tok, ',');) {
      if (tok.empty()) continue;
      if (tok.front() == '-') throw UsageError(std::string(what) + " must be non-negative");
      out.push_back(static_cast<T>(std::stoull(tok)));
    }
  } catch (const std::logic_error&) {
    throw UsageError(std::string("cannot parse ") + what + " '" + s + "'");
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

kernel::Variant parse_variant(const std::string& s) {
  try {
    return kernel::variant_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

sim::TerrainKind parse_terrain(const std::string& s) {
  try {
    return sim::terrain_kind_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct ControllerSpec {
  std::string name = "expert";
  std::string kernel;
  std::string policy;
};

void add_controller(CLI::App* sub, ControllerSpec& c) {
  sub->add_option("--controller", c.name, "expert, kernel or kernel+agent")
      ->check(CLI::IsMember({"expert", "kernel", "kernel+agent"}));
  sub->add_option("--kernel", c.kernel, "Kernel model (kernel, kernel+agent)");
  sub->add_option("--policy", c.policy, "Agent policy (kernel+agent)");
}

eval::ControllerFactory make_factory(const ControllerSpec& spec) {
  if (spec.name == "expert") {
    return [] { return std::make_unique<sim::ExpertController>(kin::default_geometry()); };
  }
  require_file(spec.kernel, "kernel model");
  auto model = std::make_shared<const kernel::Model>(kernel::load_model(spec.kernel));
  if (spec.name == "kernel") {
    return [model] { return std::make_unique<kernel::KernelController>(*model); };
  }
  require_file(spec.policy, "policy");
  std::uint64_t trained_with = 0;
  auto policy = std::make_shared<const rl::Policy>(rl::load_policy(spec.policy, &trained_with));
  if (trained_with != kernel::weight_hash(*model))
    throw UsageError(fmt::format("policy {} was trained against a different kernel (hash {:016x}, given {:016x})",
                                 spec.policy, trained_with, kernel::weight_hash(*model)));
  return [model, policy] { return std::make_unique<rl::AgentController>(*model, *policy); };
}

eval::RunConfig run_config(const AppConfig& cfg) {
  eval::RunConfig rc;
  rc.sim = cfg.sim;
  rc.terrain = cfg.terrain;
  rc.task = cfg.task;
  rc.workers = cfg.workers;
  return rc;
}

// ---------------------------------------------------------------------------

struct CollectArgs {
  Common common;
  std::size_t targets = 0;
  std::string variant = "base";
};

int cmd_collect(const CollectArgs& a, const std::vector<std::string>& argv) {
  if (a.targets == 0) throw UsageError("--targets must be at least 1");
  AppConfig cfg = resolve(a.common);
  kernel::CollectConfig cc = cfg.collect;
  cc.n_targets = a.targets;
  cc.variant = parse_variant(a.variant);
  cc.seed = cfg.seed;
  cc.sim = cfg.sim;
  kernel::CollectDiagnostics diag;
  const kernel::Dataset d = kernel::collect_dataset(cc, &diag);
  const fs::path out = output_path(a.common, cfg, "dataset.csv");
  auto os = open_out(out);
  kernel::write_dataset_csv(d, os);
  manifest(out, "collect-data", argv, cfg);
  fmt::print("samples {} episodes {} discarded falls {} timeouts {} faults {} sim_time {:.1f} s -> {}\n", d.size(),
             diag.episodes, diag.discarded_falls, diag.discarded_timeouts, diag.discarded_faults, diag.sim_time,
             out.string());
  return kExitOk;
}

struct TrainKernelArgs {
  Common common;
  std::string data;
  std::string variant;
  int epochs = 50;
  int budget = 0;
  std::string seeds;
  std::string resume;
};

int cmd_train_kernel(const TrainKernelArgs& a, const std::vector<std::string>& argv) {
  require_file(a.data, "dataset");
  if (a.epochs < 1) throw UsageError("--epochs must be at least 1");
  if (a.budget < 0) throw UsageError("--budget must be non-negative");
  AppConfig cfg = resolve(a.common);
  std::ifstream is(a.data);
  const kernel::Dataset d = kernel::read_dataset_csv(is);
  if (!a.variant.empty() && parse_variant(a.variant) != d.variant)
    throw UsageError(fmt::format("dataset holds kernel-{} samples, --variant {} requested", kernel::to_string(d.variant),
                                 a.variant));
  std::optional<kernel::Model> resume;
  if (!a.resume.empty()) {
    require_file(a.resume, "resume checkpoint");
    resume = kernel::load_model(a.resume, d.variant);
  }
  const std::vector<std::uint64_t> seeds =
      a.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : parse_list<std::uint64_t>(a.seeds, "seeds");

  const fs::path out = output_path(a.common, cfg, "kernel.bin");
  std::vector<double> best;
  for (std::uint64_t seed : seeds) {
    kernel::TrainOptions opt;
    opt.epochs = a.epochs;
    opt.budget = a.budget;
    opt.seed = seed;
    opt.resume = resume ? &*resume : nullptr;
    const kernel::TrainResult r = kernel::train_kernel(d, cfg.kernel, opt);
    const fs::path model_path =
        seeds.size() == 1 ? out : out.parent_path() / fmt::format("{}_s{}{}", out.stem().string(), seed, out.extension().string());
    kernel::save_model(r.model, model_path.string());
    auto hs = open_out(sibling(model_path, ".history.csv"));
    kernel::write_history_csv(r.history, hs);
    best.push_back(r.best_val);
    fmt::print("seed {} best epoch {} min val L1 {:.6g} -> {}\n", seed, r.best_epoch, r.best_val, model_path.string());
  }
  auto ss = open_out(sibling(out, ".summary.csv"));
  std::string per_seed;
  for (std::size_t i = 0; i < best.size(); ++i) per_seed += fmt::format("{}{}:{}", i ? ";" : "", seeds[i], best[i]);
  ss << "variant,runs,mean_min_val_l1,std_min_val_l1,per_seed\n";
  fmt::print(ss, "kernel-{},{},{},{},{}\n", kernel::to_string(d.variant), best.size(), eval::mean(best),
             eval::stddev(best), per_seed);
  fmt::print("kernel-{} mean min val L1 {:.6g} std {:.3g} over {} seeds\n", kernel::to_string(d.variant),
             eval::mean(best), eval::stddev(best), best.size());
  manifest(out, "train-kernel", argv, cfg);
  return kExitOk;
}

struct StudyArgs {
  Common common;
  std::string targets = "10,50,200";
  std::string seeds = "1,2,3";
  std::size_t updates = 5000;
  std::size_t validation_targets = 20;
};

int cmd_study(const StudyArgs& a, const std::vector<std::string>& argv) {
  AppConfig cfg = resolve(a.common);
  kernel::StudyConfig sc;
  sc.targets = parse_list<std::size_t>(a.targets, "targets");
  sc.seeds = parse_list<std::uint64_t>(a.seeds, "seeds");
  for (std::size_t t : sc.targets)
    if (t == 0) throw UsageError("target counts must be positive");
  if (a.updates == 0 || a.validation_targets == 0) throw UsageError("--updates and --validation-targets must be positive");
  sc.updates = a.updates;
  sc.validation_targets = a.validation_targets;
  sc.hparams = cfg.kernel;
  sc.collect = cfg.collect;
  sc.collect.sim = cfg.sim;
  const auto rows = kernel::data_dependence_study(sc);
  const fs::path out = output_path(a.common, cfg, "kernel_study.csv");
  auto os = open_out(out);
  kernel::write_study_csv(rows, os);
  for (const auto& r : rows) fmt::print("targets {:4} mean val L1 {:.6g} std {:.3g}\n", r.n_targets, r.mean, r.std);
  manifest(out, "kernel-study", argv, cfg);
  return kExitOk;
}

struct TrainAgentArgs {
  Common common;
  std::string kernel;
  std::optional<std::uint64_t> timesteps;
  std::optional<int> envs;
  bool flat = false;
  bool no_push = false;
  std::optional<double> push_min, push_max, episode_seconds;
};

int cmd_train_agent(const TrainAgentArgs& a, const std::vector<std::string>& argv) {
  require_file(a.kernel, "kernel model");
  AppConfig cfg = resolve(a.common);
  rl::TrainConfig tc = cfg.agent;
  tc.seed = cfg.seed;
  tc.workers = cfg.workers;
  tc.sim = cfg.sim;
  tc.terrain = cfg.terrain;
  if (a.timesteps) tc.total_timesteps = *a.timesteps;
  if (a.envs) tc.n_envs = *a.envs;
  if (a.flat) tc.flat_only = true;
  if (a.no_push) tc.perturbation.enabled = false;
  if (a.push_min) tc.perturbation.magnitude_min = *a.push_min;
  if (a.push_max) tc.perturbation.magnitude_max = *a.push_max;
  if (a.episode_seconds) tc.episode_seconds = *a.episode_seconds;
  if (tc.total_timesteps == 0 || tc.n_envs < 1) throw UsageError("--timesteps and --envs must be positive");
  if (tc.perturbation.magnitude_max < tc.perturbation.magnitude_min) throw UsageError("push range is empty");
  cfg.agent = tc;

  const kernel::Model model = kernel::load_model(a.kernel);
  const rl::TrainResult r = rl::train_agent(model, tc);
  const fs::path out = output_path(a.common, cfg, "policy.bin");
  rl::save_policy(r.policy, r.kernel_hash_after, out.string());
  {
    auto cs = open_out(sibling(out, ".curve.csv"));
    rl::write_curve_csv(r.curve, cs);
    auto es = open_out(sibling(out, ".episodes.csv"));
    rl::write_episodes_csv(r.episodes, es);
  }
  manifest(out, "train-agent", argv, cfg);
  fmt::print("timesteps {} episodes {} env faults {} kernel hash {:016x} -> {:016x} -> {}\n",
             r.curve.empty() ? 0 : r.curve.back().timesteps, r.episodes.size(), r.env_faults, r.kernel_hash_before,
             r.kernel_hash_after, out.string());
  return kExitOk;
}

struct EvalArgs {
  Common common;
  ControllerSpec controller;
  std::string terrain;
  std::size_t runs = 4;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
  const sim::TerrainKind kind = parse_terrain(a.terrain);
  if (a.runs == 0) throw UsageError("--runs must be at least 1");
  AppConfig cfg = resolve(a.common);
  const auto factory = make_factory(a.controller);
  const auto runs = eval::terrain_eval(factory, kind, a.runs, cfg.seed, run_config(cfg));
  const eval::TerrainSummary s = eval::summarize(a.controller.name, kind, runs);
  const fs::path out = output_path(a.common, cfg, fmt::format("eval_{}_{}.csv", a.controller.name, a.terrain));
  {
    auto os = open_out(out);
    eval::write_terrain_summary_csv({s}, os);
    auto rs = open_out(sibling(out, ".runs.csv"));
    eval::write_terrain_runs_csv(a.controller.name, kind, runs, rs);
  }
  manifest(out, "eval", argv, cfg);
  fmt::print("{} on {}: reward/step {:.4f} +- {:.4f}, targets {:.2f} +- {:.2f}, success {:.2f}, falls {:.2f} -> {}\n",
             s.controller, s.terrain, s.reward_mean, s.reward_std, s.targets_mean, s.targets_std, s.success_rate,
             s.fall_rate, out.string());
  if (s.faults > 0) throw SimFault(fmt::format("{} run(s) ended in a simulator fault", s.faults));
  return kExitOk;
}

struct PerturbArgs {
  Common common;
  ControllerSpec controller;
  std::string forces = "250:900:50";
  std::size_t attempts = 10;
};

int cmd_perturb(const PerturbArgs& a, const std::vector<std::string>& argv) {
  const std::vector<double> forces = parse_grid(a.forces);
  if (a.attempts == 0) throw UsageError("--attempts must be at least 1");
  AppConfig cfg = resolve(a.common);
  const auto factory = make_factory(a.controller);
  const auto rows = eval::perturbation_sweep(factory, forces, a.attempts, cfg.seed, run_config(cfg), cfg.perturb);
  const fs::path out = output_path(a.common, cfg, fmt::format("perturb_{}.csv", a.controller.name));
  {
    auto os = open_out(out);
    eval::write_perturb_csv(a.controller.name, rows, os);
  }
  manifest(out, "eval-perturb", argv, cfg);
  std::size_t faults = 0;
  for (const auto& r : rows) {
    fmt::print("{:6.0f} N: success {:.2f} ({} / {})\n", r.force, r.success_rate(), r.successes, r.attempts);
    faults += r.faults;
  }
  if (faults > 0) throw SimFault(fmt::format("{} attempt(s) ended in a simulator fault", faults));
  return kExitOk;
}

struct VelocityArgs {
  Common common;
  ControllerSpec controller;
  std::string axis = "vx";
  std::string grid = "0:0.5:0.05";
};

int cmd_velocity(const VelocityArgs& a, const std::vector<std::string>& argv) {
  const std::vector<double> grid = parse_grid(a.grid);
  eval::Axis axis;
  try {
    axis = eval::axis_from_string(a.axis);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  AppConfig cfg = resolve(a.common);
  const auto factory = make_factory(a.controller);
  const auto pts = eval::velocity_sweep(factory, axis, grid, cfg.seed, run_config(cfg), cfg.sweep);
  const fs::path out = output_path(a.common, cfg, fmt::format("velocity_{}_{}.csv", a.controller.name, a.axis));
  {
    auto os = open_out(out);
    eval::write_velocity_csv(a.controller.name, axis, pts, os);
  }
  manifest(out, "velocity-sweep", argv, cfg);
  for (const auto& p : pts)
    fmt::print("{:+.3f} -> {:+.4f} (std {:.4f}){}\n", p.command, p.realized_mean, p.realized_std, p.fell ? " fell" : "");
  fmt::print("correlation {:.4f}\n", eval::velocity_correlation(pts));
  return kExitOk;
}

struct GaitArgs {
  Common common;
  ControllerSpec controller;
  std::string gait = "walk";
  double vx = 0.2;
  double duration = 20.0;
};

int cmd_gait(const GaitArgs& a, const std::vector<std::string>& argv) {
  gait::GaitParams params;
  try {
    params = gait::preset(a.gait);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(a.duration > 0.0)) throw UsageError("--duration must be positive");
  AppConfig cfg = resolve(a.common);
  const auto factory = make_factory(a.controller);
  const auto r = eval::gait_generalization_eval(factory, a.gait, params, a.vx, a.duration, cfg.seed, run_config(cfg));
  const fs::path out = output_path(a.common, cfg, fmt::format("gait_{}_{}.csv", a.controller.name, a.gait));
  {
    auto os = open_out(out);
    eval::write_gait_timeline_csv(r, os);
    auto ss = open_out(sibling(out, ".summary.csv"));
    ss << "controller,gait,contact_error,forward_progress,fell\n";
    fmt::print(ss, "{},{},{},{},{}\n", a.controller.name, r.gait, r.contact_error, r.forward_progress, int(r.fell));
  }
  manifest(out, "gait-eval", argv, cfg);
  fmt::print("{} {}: contact error {:.3f}, progress {:.2f} m{}\n", a.controller.name, r.gait, r.contact_error,
             r.forward_progress, r.fell ? ", fell" : "");
  return kExitOk;
}

struct HeightArgs {
  Common common;
  ControllerSpec controller;
  std::string kind = "step";
  std::string grid;
  double vx = 0.2;
};

int cmd_height(const HeightArgs& a, const std::vector<std::string>& argv) {
  eval::HeightKind kind;
  try {
    kind = eval::height_kind_from_string(a.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string grid_text = !a.grid.empty() ? a.grid : (kind == eval::HeightKind::kStep ? "0.05:0.17:0.02" : "0.18:0.28:0.02");
  const std::vector<double> grid = parse_grid(grid_text);
  AppConfig cfg = resolve(a.common);
  const auto factory = make_factory(a.controller);
  const auto pts = eval::height_command_sweep(factory, kind, grid, a.vx, cfg.seed, run_config(cfg), cfg.sweep);
  const fs::path out = output_path(a.common, cfg, fmt::format("height_{}_{}.csv", a.controller.name, a.kind));
  {
    auto os = open_out(out);
    eval::write_height_csv(a.controller.name, kind, pts, os);
  }
  manifest(out, "height-sweep", argv, cfg);
  for (const auto& p : pts)
    fmt::print("{:.3f} -> {:.4f} (std {:.4f}){}\n", p.command, p.realized_mean, p.realized_std, p.fell ? " fell" : "");
  return kExitOk;
}

struct TerrainArgs {
  Common common;
  std::string terrain;
  double extent = 5.0;
  double step = 0.05;
};

int cmd_terrain(const TerrainArgs& a, const std::vector<std::string>& argv) {
  const sim::TerrainKind kind = parse_terrain(a.terrain);
  if (!(a.extent > 0.0) || !(a.step > 0.0)) throw UsageError("--extent and --step must be positive");
  AppConfig cfg = resolve(a.common);
  const sim::Terrain t = sim::make_terrain(kind, cfg.terrain, cfg.seed);
  const fs::path out = output_path(a.common, cfg, fmt::format("terrain_{}.csv", a.terrain));
  {
    auto os = open_out(out);
    t.write_grid_csv(os, -a.extent, a.extent, -a.extent, a.extent, a.step);
  }
  manifest(out, "terrain-export", argv, cfg);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resloco: analytic expert, kernel distillation and residual agent for quadruped locomotion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  const std::vector<std::string> args(argv, argv + argc);

  CollectArgs collect;
  auto* c = app.add_subcommand("collect-data", "Record expert demonstrations");
  add_common(c, collect.common);
  c->add_option("--targets", collect.targets, "Consecutive target locations")->required();
  c->add_option("--variant", collect.variant, "base, ind or ext");

  TrainKernelArgs tk;
  auto* k = app.add_subcommand("train-kernel", "Train a kernel on a dataset");
  add_common(k, tk.common);
  k->add_option("--data", tk.data, "Dataset CSV")->required();
  k->add_option("--variant", tk.variant, "Expected variant (checked against the dataset)");
  k->add_option("--epochs", tk.epochs, "Epochs to run");
  k->add_option("--budget", tk.budget, "Epochs the LR schedule spans (default: --epochs)");
  k->add_option("--seeds", tk.seeds, "Comma-separated seeds; one model per seed");
  k->add_option("--resume", tk.resume, "Continue from this checkpoint");

  StudyArgs study;
  auto* ks = app.add_subcommand("kernel-study", "Validation loss against dataset size");
  add_common(ks, study.common);
  ks->add_option("--targets", study.targets, "Comma-separated target counts");
  ks->add_option("--seeds", study.seeds, "Comma-separated seeds");
  ks->add_option("--updates", study.updates, "Optimizer updates per run");
  ks->add_option("--validation-targets", study.validation_targets, "Held-out targets");

  TrainAgentArgs ta;
  auto* t = app.add_subcommand("train-agent", "Train the residual agent on a frozen kernel");
  add_common(t, ta.common);
  t->add_option("--kernel", ta.kernel, "Kernel model")->required();
  t->add_option("--timesteps", ta.timesteps, "Total environment steps");
  t->add_option("--envs", ta.envs, "Parallel environments");
  t->add_flag("--flat", ta.flat, "Flat terrain only");
  t->add_flag("--no-push", ta.no_push, "Disable perturbations");
  t->add_option("--push-min", ta.push_min, "Minimum push force, N");
  t->add_option("--push-max", ta.push_max, "Maximum push force, N");
  t->add_option("--episode-seconds", ta.episode_seconds, "Episode length");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Terrain evaluation");
  add_common(e, ev.common);
  add_controller(e, ev.controller);
  e->add_option("--terrain", ev.terrain, "tabletop, seesaw, stairs, sinusoidal, flat, heightfield or perlin")->required();
  e->add_option("--runs", ev.runs, "Episodes");

  PerturbArgs pa;
  auto* p = app.add_subcommand("eval-perturb", "Push-recovery sweep");
  add_common(p, pa.common);
  add_controller(p, pa.controller);
  p->add_option("--forces", pa.forces, "Force grid start:stop:step or list, N");
  p->add_option("--attempts", pa.attempts, "Attempts per force");

  VelocityArgs va;
  auto* v = app.add_subcommand("velocity-sweep", "Commanded against realized velocity");
  add_common(v, va.common);
  add_controller(v, va.controller);
  v->add_option("--axis", va.axis, "vx, vy or wz");
  v->add_option("--grid", va.grid, "Command grid start:stop:step or list");

  GaitArgs ga;
  auto* g = app.add_subcommand("gait-eval", "Run a gait preset and record the contact timeline");
  add_common(g, ga.common);
  add_controller(g, ga.controller);
  g->add_option("--gait", ga.gait, "walk, trot or bound");
  g->add_option("--vx", ga.vx, "Forward command, m/s");
  g->add_option("--duration", ga.duration, "Seconds");

  HeightArgs ha;
  auto* h = app.add_subcommand("height-sweep", "Step or ride height tracking");
  add_common(h, ha.common);
  add_controller(h, ha.controller);
  h->add_option("--kind", ha.kind, "step or ride");
  h->add_option("--grid", ha.grid, "Command grid start:stop:step or list, m");
  h->add_option("--vx", ha.vx, "Forward command while measuring, m/s");

  TerrainArgs te;
  auto* x = app.add_subcommand("terrain-export", "Write a terrain height grid");
  add_common(x, te.common);
  x->add_option("--terrain", te.terrain, "Terrain kind")->required();
  x->add_option("--extent", te.extent, "Half width of the grid, m");
  x->add_option("--step", te.step, "Grid spacing, m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_collect(collect, args);
    if (k->parsed()) return cmd_train_kernel(tk, args);
    if (ks->parsed()) return cmd_study(study, args);
    if (t->parsed()) return cmd_train_agent(ta, args);
    if (e->parsed()) return cmd_eval(ev, args);
    if (p->parsed()) return cmd_perturb(pa, args);
    if (v->parsed()) return cmd_velocity(va, args);
    if (g->parsed()) return cmd_gait(ga, args);
    if (h->parsed()) return cmd_height(ha, args);
    if (x->parsed()) return cmd_terrain(te, args);
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return kExitUsage;
  } catch (const SimFault& err) {
    std::fprintf(stderr, "simulator fault: %s\n", err.what());
    return kExitSimFault;
  } catch (const io::FormatException& err) {
    std::fprintf(stderr, "format error (%s): %s\n", io::to_string(err.code()), err.what());
    return kExitRuntime;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
