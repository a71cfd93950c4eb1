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

#include <atomic>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "resloco/episode.hpp"
#include "resloco/eval.hpp"

namespace resloco::eval {
namespace {

ControllerFactory expert_factory() {
  return [] { return std::make_unique<sim::ExpertController>(kin::default_geometry()); };
}

TEST(Stats, Basics) {
  EXPECT_DOUBLE_EQ(mean({1.0, 2.0, 6.0}), 3.0);
  EXPECT_NEAR(stddev({1.0, 2.0, 6.0}), std::sqrt(14.0 / 3.0), 1e-15);
  EXPECT_NEAR(pearson({1, 2, 3, 4}, {2, 4, 6, 8}), 1.0, 1e-15);
  EXPECT_NEAR(pearson({1, 2, 3, 4}, {8, 6, 4, 2}), -1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 8, 27, 64}), 1.0, 1e-15);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> s;
  for (std::uint64_t i = 0; i < 1000; ++i) s.insert(derive_seed(7, i));
  EXPECT_EQ(s.size(), 1000u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
}

TEST(Layout, FourStartsFiveTargets) {
  for (sim::TerrainKind k : {sim::TerrainKind::kTabletop, sim::TerrainKind::kSeesaw, sim::TerrainKind::kStairs,
                             sim::TerrainKind::kSinusoidal}) {
    const Layout l = evaluation_layout(k, {});
    ASSERT_EQ(l.starts.size(), 4u);
    ASSERT_EQ(l.targets.size(), 4u);
    for (const auto& t : l.targets) EXPECT_EQ(t.size(), 5u);
  }
}

TEST(TerrainEval, WorkerCountDoesNotChangeResults) {
  RunConfig cfg;
  cfg.task.timeout = 8.0;
  std::ostringstream a, b;
  cfg.workers = 1;
  write_terrain_runs_csv("expert", sim::TerrainKind::kStairs,
                         terrain_eval(expert_factory(), sim::TerrainKind::kStairs, 3, 5, cfg), a);
  cfg.workers = 3;
  const auto runs = terrain_eval(expert_factory(), sim::TerrainKind::kStairs, 3, 5, cfg);
  write_terrain_runs_csv("expert", sim::TerrainKind::kStairs, runs, b);
  EXPECT_EQ(a.str(), b.str());
  const TerrainSummary s = summarize("expert", sim::TerrainKind::kStairs, runs);
  EXPECT_EQ(s.runs, 3u);
  EXPECT_GE(s.success_rate, 0.0);
  EXPECT_LE(s.success_rate, 1.0);
}

TEST(Perturb, ZeroForceSucceeds) {
  RunConfig cfg;
  PerturbConfig pc;
  pc.target_distance = 1.0;
  pc.timeout = 20.0;
  const auto rows = perturbation_sweep(expert_factory(), {0.0}, 2, 3, cfg, pc);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].attempts, 2u);
  EXPECT_EQ(rows[0].success_rate(), 1.0);
}

TEST(VelocitySweep, ExpertTracksForwardCommand) {
  RunConfig cfg;
  SweepTiming t;
  t.measure = 3.0;
  const auto pts = velocity_sweep(expert_factory(), Axis::kVx, {0.0, 0.2, 0.4}, 1, cfg, t);
  ASSERT_EQ(pts.size(), 3u);
  for (const auto& p : pts) EXPECT_FALSE(p.fell);
  EXPECT_LT(pts[0].realized_mean, pts[1].realized_mean);
  EXPECT_LT(pts[1].realized_mean, pts[2].realized_mean);
  EXPECT_GE(velocity_correlation(pts), 0.95);
}

TEST(GaitEval, TimelineShapes) {
  RunConfig cfg;
  const GaitEvalResult r = gait_generalization_eval(expert_factory(), "walk", gait::walk(), 0.2, 2.0, 1, cfg);
  EXPECT_EQ(r.time.size(), r.scheduled.size());
  EXPECT_EQ(r.time.size(), r.realized.size());
  EXPECT_GE(r.contact_error, 0.0);
  EXPECT_LE(r.contact_error, 1.0);
  std::ostringstream os;
  write_gait_timeline_csv(r, os);
  EXPECT_GT(os.str().size(), 0u);
}

TEST(HeightSweep, RideHeightFollowsCommand) {
  RunConfig cfg;
  SweepTiming t;
  t.measure = 2.0;
  const auto pts = height_command_sweep(expert_factory(), HeightKind::kRide, {0.20, 0.26}, 0.1, 1, cfg, t);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_LT(pts[0].realized_mean, pts[1].realized_mean);
  EXPECT_EQ(height_kind_from_string("step"), HeightKind::kStep);
  EXPECT_THROW(axis_from_string("vz"), std::invalid_argument);
}

}  // namespace
}  // namespace resloco::eval
