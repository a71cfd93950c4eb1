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

#include "resloco/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace resloco::eval {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal-length series");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

Vec2 rotate(const Vec2& p, double a) { return {std::cos(a) * p.x() - std::sin(a) * p.y(), std::sin(a) * p.x() + std::cos(a) * p.y()}; }

sim::World make_world(const RunConfig& cfg, sim::TerrainKind kind, std::uint64_t seed) {
  return sim::World(cfg.sim, kin::default_geometry(), sim::make_terrain(kind, cfg.terrain, seed));
}

const Vec2 kFar(1.0e4, 1.0e4);

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) { return pearson(ranks(x), ranks(y)); }

Layout evaluation_layout(sim::TerrainKind kind, const sim::TerrainParams& params) {
  Layout l;
  switch (kind) {
    case sim::TerrainKind::kSeesaw: {
      // The plank starts with its +x end on the ground; every start climbs
      // from that end, crosses the pivot and comes back.
      const double half = params.seesaw_length / 2.0;
      const double w = 0.25 * params.seesaw_width;
      for (double y0 : {0.0, w, -w, 0.0}) {
        const double x0 = half + (y0 == 0.0 && !l.starts.empty() ? 2.0 : 1.5);
        l.starts.push_back({{x0, y0}, kPi});
        l.targets.push_back({{half - 1.0, y0}, {0.0, 0.0}, {-half + 1.0, 0.0}, {-half - 1.2, 0.0}, {-half + 1.0, 0.0}});
      }
      break;
    }
    case sim::TerrainKind::kStairs: {
      const double x0 = params.stair_start;
      const double run = params.stair_count * params.stair_tread;
      const double x1 = x0 + 2.0 * run + params.stair_plateau;
      const double mid = 0.5 * (x0 + x1);
      const std::vector<Vec2> path{{x0 + 0.6 * run, 0.0}, {mid, 0.5}, {x1 - 0.6 * run, 0.0}, {x1 + 1.0, 0.0}, {mid, -0.5}};
      const std::vector<std::pair<double, bool>> starts{{0.0, false}, {1.5, false}, {-1.5, false}, {0.0, true}};
      for (auto [y0, mirrored] : starts) {
        std::vector<Vec2> t;
        for (const Vec2& p : path) t.push_back(mirrored ? Vec2(2.0 * mid - p.x(), p.y() + y0) : Vec2(p.x(), p.y() + y0));
        const double sx = mirrored ? x1 + 1.0 : x0 - 1.0;
        l.starts.push_back({{sx, y0}, mirrored ? kPi : 0.0});
        l.targets.push_back(std::move(t));
      }
      break;
    }
    default: {
      // Tabletop, sinusoidal and the training terrains: a path across the
      // center, rotated for each of four starts around it.
      const std::vector<Vec2> path{{-2.5, 1.0}, {0.0, -1.0}, {2.5, 1.0}, {0.5, 2.5}, {-1.5, 0.0}};
      for (int k = 0; k < 4; ++k) {
        const double a = k * kPi / 2.0;
        std::vector<Vec2> t;
        for (const Vec2& p : path) t.push_back(rotate(p, a));
        l.starts.push_back({rotate(Vec2(-5.0, 0.0), a), a});
        l.targets.push_back(std::move(t));
      }
      break;
    }
  }
  return l;
}

std::vector<TerrainRun> terrain_eval(const ControllerFactory& make, sim::TerrainKind kind, std::size_t runs,
                                     std::uint64_t seed, const RunConfig& cfg) {
  const Layout layout = evaluation_layout(kind, cfg.terrain);
  std::vector<TerrainRun> out(runs);
  parallel_for(runs, cfg.workers, [&](std::size_t i) {
    const std::size_t s = i % layout.starts.size();
    sim::World world = make_world(cfg, kind, derive_seed(seed, 2 * i));
    world.reset(layout.starts[s].position, layout.starts[s].yaw, cfg.task.command.ride_height);
    sim::Task task(std::move(world), cfg.task, layout.targets[s], derive_seed(seed, 2 * i + 1));
    auto controller = make();
    out[i].run = i;
    out[i].start = s;
    out[i].metrics = sim::run_episode(task, *controller);
  });
  return out;
}

TerrainSummary summarize(const std::string& controller, sim::TerrainKind kind, const std::vector<TerrainRun>& runs) {
  TerrainSummary s;
  s.controller = controller;
  s.terrain = sim::to_string(kind);
  std::vector<double> rewards, targets;
  std::size_t success = 0, falls = 0;
  for (const auto& r : runs) {
    if (r.metrics.fault) {
      ++s.faults;
      continue;
    }
    rewards.push_back(r.metrics.reward_mean);
    targets.push_back(static_cast<double>(r.metrics.num_targets));
    success += r.metrics.success;
    falls += r.metrics.fell;
  }
  s.runs = rewards.size();
  s.reward_mean = mean(rewards);
  s.reward_std = stddev(rewards);
  s.targets_mean = mean(targets);
  s.targets_std = stddev(targets);
  if (s.runs > 0) {
    s.success_rate = static_cast<double>(success) / static_cast<double>(s.runs);
    s.fall_rate = static_cast<double>(falls) / static_cast<double>(s.runs);
  }
  return s;
}

void write_terrain_runs_csv(const std::string& controller, sim::TerrainKind kind, const std::vector<TerrainRun>& runs,
                            std::ostream& os) {
  os << "controller,terrain,run,start,reward_per_step,reward_std,steps,num_targets,success,fell,timeout,fault\n";
  for (const auto& r : runs) {
    const auto& m = r.metrics;
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{}\n", controller, sim::to_string(kind), r.run, r.start,
               m.reward_mean, m.reward_std, m.steps, m.num_targets, int(m.success), int(m.fell), int(m.timeout),
               int(m.fault));
  }
}

void write_terrain_summary_csv(const std::vector<TerrainSummary>& rows, std::ostream& os) {
  os << "controller,terrain,reward_per_step_mean,reward_per_step_std,num_targets_mean,num_targets_std,success_rate,"
        "fall_rate,runs,faults\n";
  for (const auto& r : rows) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{}\n", r.controller, r.terrain, r.reward_mean, r.reward_std,
               r.targets_mean, r.targets_std, r.success_rate, r.fall_rate, r.runs, r.faults);
  }
}

// ---------------------------------------------------------------------------

std::vector<PerturbResult> perturbation_sweep(const ControllerFactory& make, const std::vector<double>& forces,
                                              std::size_t attempts, std::uint64_t seed, const RunConfig& cfg,
                                              const PerturbConfig& pc) {
  if (forces.empty()) throw std::invalid_argument("perturbation sweep: empty force grid");
  std::vector<PerturbResult> out(forces.size());
  struct Cell {
    bool success = false, fell = false, fault = false;
  };
  std::vector<Cell> cells(forces.size() * attempts);
  parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
    const double f = forces[i / attempts];
    sim::TaskConfig tc = cfg.task;
    tc.timeout = pc.timeout;
    tc.perturbation.enabled = f > 0.0;
    tc.perturbation.magnitude_min = tc.perturbation.magnitude_max = f;
    tc.perturbation.interval_min = pc.push_time_min;
    tc.perturbation.interval_max = pc.push_time_max;
    tc.perturbation.max_pushes = 1;
    sim::World world = make_world(cfg, sim::TerrainKind::kFlat, 0);
    world.reset(Vec2::Zero(), 0.0, tc.command.ride_height);
    sim::Task task(std::move(world), tc, {Vec2(pc.target_distance, 0.0)}, derive_seed(seed, i));
    auto controller = make();
    const sim::EpisodeMetrics m = sim::run_episode(task, *controller);
    cells[i] = {m.success, m.fell, m.fault};
  });
  for (std::size_t k = 0; k < forces.size(); ++k) {
    out[k].force = forces[k];
    out[k].attempts = attempts;
    for (std::size_t a = 0; a < attempts; ++a) {
      const Cell& c = cells[k * attempts + a];
      out[k].successes += c.success;
      out[k].falls += c.fell;
      out[k].faults += c.fault;
    }
  }
  return out;
}

void write_perturb_csv(const std::string& controller, const std::vector<PerturbResult>& rows, std::ostream& os) {
  os << "controller,force_n,attempts,successes,falls,faults,success_rate\n";
  for (const auto& r : rows) {
    fmt::print(os, "{},{},{},{},{},{},{}\n", controller, r.force, r.attempts, r.successes, r.falls, r.faults,
               r.success_rate());
  }
}

// ---------------------------------------------------------------------------

Axis axis_from_string(const std::string& s) {
  if (s == "vx") return Axis::kVx;
  if (s == "vy") return Axis::kVy;
  if (s == "wz") return Axis::kWz;
  throw std::invalid_argument(fmt::format("unknown axis '{}'", s));
}

std::string to_string(Axis a) {
  switch (a) {
    case Axis::kVx: return "vx";
    case Axis::kVy: return "vy";
    case Axis::kWz: return "wz";
  }
  return "?";
}

namespace {

double ramp_time(double value) {
  return std::abs(value) / (ref::CommandLimits::kMaxDelta * ref::kCommandRateHz);
}

}  // namespace

std::vector<VelocityPoint> velocity_sweep(const ControllerFactory& make, Axis axis, const std::vector<double>& grid,
                                          std::uint64_t seed, const RunConfig& cfg, const SweepTiming& timing) {
  if (grid.empty()) throw std::invalid_argument("velocity sweep: empty grid");
  std::vector<VelocityPoint> out(grid.size());
  parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
    const double c = grid[i];
    sim::TaskConfig tc = cfg.task;
    tc.fixed_command = true;
    tc.command.vx = axis == Axis::kVx ? c : 0.0;
    tc.command.vy = axis == Axis::kVy ? c : 0.0;
    tc.command.wz = axis == Axis::kWz ? c : 0.0;
    const double settle = ramp_time(c) + timing.settle_extra;
    tc.timeout = settle + timing.measure;
    sim::World world = make_world(cfg, sim::TerrainKind::kFlat, 0);
    world.reset(Vec2::Zero(), 0.0, tc.command.ride_height);
    sim::Task task(std::move(world), tc, {kFar}, derive_seed(seed, i));
    auto controller = make();
    std::vector<double> samples;
    const sim::EpisodeMetrics m = sim::run_episode(task, *controller, [&](const sim::Task& t, const sim::StepOutcome&) {
      if (t.elapsed() < settle) return;
      const auto& b = t.world().base();
      const Vec3 v = b.body_linear_velocity();
      samples.push_back(axis == Axis::kVx ? v.x() : axis == Axis::kVy ? v.y() : b.angular_velocity.z());
    });
    out[i].command = c;
    out[i].fell = m.fell || m.fault;
    out[i].realized_mean = mean(samples);
    out[i].realized_std = stddev(samples);
  });
  return out;
}

void write_velocity_csv(const std::string& controller, Axis axis, const std::vector<VelocityPoint>& pts,
                        std::ostream& os) {
  os << "controller,axis,command,realized_mean,realized_std,fell\n";
  for (const auto& p : pts) {
    fmt::print(os, "{},{},{},{},{},{}\n", controller, to_string(axis), p.command, p.realized_mean, p.realized_std,
               int(p.fell));
  }
}

double velocity_correlation(const std::vector<VelocityPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts) {
    if (p.fell) continue;
    x.push_back(p.command);
    y.push_back(p.realized_mean);
  }
  if (x.size() < 2) return 0.0;
  return pearson(x, y);
}

// ---------------------------------------------------------------------------

GaitEvalResult gait_generalization_eval(const ControllerFactory& make, const std::string& name,
                                        const gait::GaitParams& params, double vx, double duration,
                                        std::uint64_t seed, const RunConfig& cfg) {
  gait::validate(params);
  GaitEvalResult r;
  r.gait = name;
  sim::TaskConfig tc = cfg.task;
  tc.gait = params;
  tc.fixed_command = true;
  tc.command.vx = vx;
  tc.command.vy = tc.command.wz = 0.0;
  tc.timeout = duration;
  sim::World world = make_world(cfg, sim::TerrainKind::kFlat, 0);
  world.reset(Vec2::Zero(), 0.0, tc.command.ride_height);
  const Vec2 start = world.base().position.head<2>();
  sim::Task task(std::move(world), tc, {kFar}, seed);
  auto controller = make();
  const double dt = cfg.sim.control_dt;
  std::size_t errors = 0, total = 0;
  const sim::EpisodeMetrics m = sim::run_episode(task, *controller, [&](const sim::Task& t, const sim::StepOutcome&) {
    const double time = t.elapsed() - dt;
    const gait::GaitState gs = gait::state_at(params, time);
    std::array<bool, kNumLegs> sched{};
    for (std::size_t i = 0; i < kNumLegs; ++i) sched[i] = gait::leg_state(gs.phi[i], params.r_swing) == gait::LegState::kStance;
    const auto real = t.world().contacts();
    for (std::size_t i = 0; i < kNumLegs; ++i) errors += sched[i] != real[i];
    total += kNumLegs;
    r.time.push_back(time);
    r.scheduled.push_back(sched);
    r.realized.push_back(real);
  });
  r.fell = m.fell || m.fault;
  r.contact_error = total ? static_cast<double>(errors) / static_cast<double>(total) : 0.0;
  r.forward_progress = task.world().base().position.x() - start.x();
  return r;
}

void write_gait_timeline_csv(const GaitEvalResult& r, std::ostream& os) {
  os << "time,sched0,sched1,sched2,sched3,contact0,contact1,contact2,contact3\n";
  for (std::size_t k = 0; k < r.time.size(); ++k) {
    const auto& s = r.scheduled[k];
    const auto& c = r.realized[k];
    fmt::print(os, "{:.6f},{},{},{},{},{},{},{},{}\n", r.time[k], int(s[0]), int(s[1]), int(s[2]), int(s[3]), int(c[0]),
               int(c[1]), int(c[2]), int(c[3]));
  }
}

// ---------------------------------------------------------------------------

HeightKind height_kind_from_string(const std::string& s) {
  if (s == "step") return HeightKind::kStep;
  if (s == "ride") return HeightKind::kRide;
  throw std::invalid_argument(fmt::format("unknown height kind '{}'", s));
}

std::vector<HeightPoint> height_command_sweep(const ControllerFactory& make, HeightKind which,
                                              const std::vector<double>& grid, double vx, std::uint64_t seed,
                                              const RunConfig& cfg, const SweepTiming& timing) {
  if (grid.empty()) throw std::invalid_argument("height sweep: empty grid");
  std::vector<HeightPoint> out(grid.size());
  parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
    sim::TaskConfig tc = cfg.task;
    tc.fixed_command = true;
    tc.command.vx = vx;
    tc.command.vy = tc.command.wz = 0.0;
    if (which == HeightKind::kStep) {
      tc.command.step_height = grid[i];
    } else {
      tc.command.ride_height = grid[i];
    }
    const double settle = ramp_time(vx) + timing.settle_extra;
    tc.timeout = settle + timing.measure;
    sim::World world = make_world(cfg, sim::TerrainKind::kFlat, 0);
    world.reset(Vec2::Zero(), 0.0, ref::CommandLimits::kRideDefault);
    sim::Task task(std::move(world), tc, {kFar}, derive_seed(seed, i));
    auto controller = make();
    std::vector<double> samples;
    std::array<double, kNumLegs> peak{};
    std::array<bool, kNumLegs> swinging{};
    const gait::GaitParams& gp = tc.gait;
    const sim::EpisodeMetrics m = sim::run_episode(task, *controller, [&](const sim::Task& t, const sim::StepOutcome&) {
      const bool measuring = t.elapsed() >= settle;
      const sim::World& w = t.world();
      if (which == HeightKind::kRide) {
        if (measuring) samples.push_back(w.base().position.z() - w.terrain_height_below_base());
        return;
      }
      const gait::GaitState gs = gait::state_at(gp, t.elapsed());
      for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
        const bool swing = gait::leg_state(gs.phi[leg], gp.r_swing) == gait::LegState::kSwing;
        const Vec3& f = w.legs()[leg].foot_world;
        const double h = f.z() - w.terrain().height(f.x(), f.y());
        if (swing) {
          peak[leg] = swinging[leg] ? std::max(peak[leg], h) : h;
        } else if (swinging[leg] && measuring) {
          samples.push_back(peak[leg]);
        }
        swinging[leg] = swing;
      }
    });
    out[i].command = grid[i];
    out[i].fell = m.fell || m.fault;
    out[i].realized_mean = mean(samples);
    out[i].realized_std = stddev(samples);
  });
  return out;
}

void write_height_csv(const std::string& controller, HeightKind which, const std::vector<HeightPoint>& pts,
                      std::ostream& os) {
  os << "controller,kind,command,realized_mean,realized_std,fell\n";
  for (const auto& p : pts) {
    fmt::print(os, "{},{},{},{},{},{}\n", controller, which == HeightKind::kStep ? "step" : "ride", p.command,
               p.realized_mean, p.realized_std, int(p.fell));
  }
}

}  // namespace resloco::eval
