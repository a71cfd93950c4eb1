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

// Evaluation protocols: terrain runs, perturbation and velocity sweeps, gait
// generalization and height-command sweeps. Every protocol fans its runs out
// over worker threads and merges results in run order.

#ifndef RESLOCO_EVAL_HPP_
#define RESLOCO_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "resloco/episode.hpp"
#include "resloco/sim.hpp"
#include "resloco/terrain.hpp"

namespace resloco::eval {

using ControllerFactory = std::function<std::unique_ptr<sim::Controller>()>;

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Seed for run `index` derived from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);  // population
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Start {
  Vec2 position = Vec2::Zero();
  double yaw = 0.0;
};

struct Layout {
  std::vector<Start> starts;            // one per run, cycled
  std::vector<std::vector<Vec2>> targets;  // per start
};

/// Four starting locations with five targets each, placed across the
/// terrain feature.
Layout evaluation_layout(sim::TerrainKind kind, const sim::TerrainParams& params);

struct RunConfig {
  sim::SimConfig sim{};
  sim::TerrainParams terrain{};
  sim::TaskConfig task{};
  int workers = 1;
};

struct TerrainRun {
  std::size_t run = 0;
  std::size_t start = 0;
  sim::EpisodeMetrics metrics;
};

struct TerrainSummary {
  std::string controller;
  std::string terrain;
  double reward_mean = 0.0;  // mean over runs of per-step reward
  double reward_std = 0.0;
  double targets_mean = 0.0;
  double targets_std = 0.0;
  double success_rate = 0.0;
  double fall_rate = 0.0;
  std::size_t runs = 0;
  std::size_t faults = 0;  // excluded from the statistics
};

/// `runs` episodes on `kind`, cycling through the layout's starts.
std::vector<TerrainRun> terrain_eval(const ControllerFactory& make, sim::TerrainKind kind, std::size_t runs,
                                     std::uint64_t seed, const RunConfig& cfg);
TerrainSummary summarize(const std::string& controller, sim::TerrainKind kind, const std::vector<TerrainRun>& runs);
void write_terrain_runs_csv(const std::string& controller, sim::TerrainKind kind, const std::vector<TerrainRun>& runs,
                            std::ostream& os);
void write_terrain_summary_csv(const std::vector<TerrainSummary>& rows, std::ostream& os);

struct PerturbResult {
  double force = 0.0;
  std::size_t attempts = 0;
  std::size_t successes = 0;
  std::size_t falls = 0;
  std::size_t faults = 0;
  double success_rate() const { return attempts > faults ? double(successes) / double(attempts - faults) : 0.0; }
};

struct PerturbConfig {
  double target_distance = 3.0;
  double push_time_min = 2.0;  // seconds after start
  double push_time_max = 4.0;
  double timeout = 60.0;
};

/// Single target on flat ground; one push of the given magnitude per attempt.
std::vector<PerturbResult> perturbation_sweep(const ControllerFactory& make, const std::vector<double>& forces,
                                              std::size_t attempts, std::uint64_t seed, const RunConfig& cfg,
                                              const PerturbConfig& pc = {});
void write_perturb_csv(const std::string& controller, const std::vector<PerturbResult>& rows, std::ostream& os);

enum class Axis { kVx, kVy, kWz };
Axis axis_from_string(const std::string& s);
std::string to_string(Axis a);

struct VelocityPoint {
  double command = 0.0;
  double realized_mean = 0.0;
  double realized_std = 0.0;
  bool fell = false;  // missing point
};

struct SweepTiming {
  double settle_extra = 2.0;  // seconds beyond the command ramp
  double measure = 5.0;
};

/// Fixed-command locomotion on flat ground per grid point; realized velocity
/// along `axis` in the base frame.
std::vector<VelocityPoint> velocity_sweep(const ControllerFactory& make, Axis axis, const std::vector<double>& grid,
                                          std::uint64_t seed, const RunConfig& cfg, const SweepTiming& timing = {});
void write_velocity_csv(const std::string& controller, Axis axis, const std::vector<VelocityPoint>& pts,
                        std::ostream& os);
/// Pearson correlation of command vs realized over points that did not fall.
double velocity_correlation(const std::vector<VelocityPoint>& pts);

struct GaitEvalResult {
  std::string gait;
  double contact_error = 0.0;  // fraction of leg-ticks disagreeing with the schedule
  double forward_progress = 0.0;  // meters along the initial heading
  bool fell = false;
  std::vector<double> time;
  std::vector<std::array<bool, kNumLegs>> scheduled;
  std::vector<std::array<bool, kNumLegs>> realized;
};

/// Runs `params` at a fixed forward command for `duration` seconds.
GaitEvalResult gait_generalization_eval(const ControllerFactory& make, const std::string& name,
                                        const gait::GaitParams& params, double vx, double duration,
                                        std::uint64_t seed, const RunConfig& cfg);
void write_gait_timeline_csv(const GaitEvalResult& r, std::ostream& os);

enum class HeightKind { kStep, kRide };
HeightKind height_kind_from_string(const std::string& s);

struct HeightPoint {
  double command = 0.0;
  double realized_mean = 0.0;
  double realized_std = 0.0;
  bool fell = false;
};

/// Step: mean of per-swing peak foot height above the terrain. Ride: mean
/// base height above the terrain. Forward command `vx` while measuring.
std::vector<HeightPoint> height_command_sweep(const ControllerFactory& make, HeightKind which,
                                              const std::vector<double>& grid, double vx, std::uint64_t seed,
                                              const RunConfig& cfg, const SweepTiming& timing = {});
void write_height_csv(const std::string& controller, HeightKind which, const std::vector<HeightPoint>& pts,
                      std::ostream& os);

}  // namespace resloco::eval

#endif  // RESLOCO_EVAL_HPP_
