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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "resloco/terrain.hpp"

namespace resloco::sim {
namespace {

constexpr double kDeg = kPi / 180.0;

TEST(Terrain, FlatIsZero) {
  const Terrain t = make_terrain(TerrainKind::kFlat, {}, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng), y = u(rng);
    EXPECT_EQ(t.height(x, y), 0.0);
    EXPECT_EQ(t.normal(x, y), Vec3(0.0, 0.0, 1.0));
  }
}

TEST(Terrain, StairsRiseOneStepPerTread) {
  const TerrainParams p{};
  const Terrain t = make_terrain(TerrainKind::kStairs, p, 0);
  EXPECT_EQ(t.height(p.stair_start - 0.01, 0.0), 0.0);
  for (int k = 0; k < p.stair_count; ++k) {
    const double x = p.stair_start + (k + 0.5) * p.stair_tread;
    EXPECT_NEAR(t.height(x, 0.3), (k + 1) * 0.04, 1e-12);
  }
  const double top = p.stair_start + p.stair_count * p.stair_tread + 0.5 * p.stair_plateau;
  EXPECT_NEAR(t.height(top, 0.0), p.stair_count * 0.04, 1e-12);
}

TEST(Terrain, SinusoidAmplitudeAndSlope) {
  TerrainParams p{};
  p.sinusoid_wavelength = 2.0;
  const Terrain t = make_terrain(TerrainKind::kSinusoidal, p, 0);
  EXPECT_NEAR(t.sinusoid_amplitude(), 2.0 * std::tan(11.5 * kDeg) / (2.0 * kPi), 1e-15);
  EXPECT_NEAR(t.sinusoid_amplitude(), 0.0647, 1e-4);
  double lo = 1e9, hi = -1e9, slope = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = -2.0 + 4.0 * i / 20000.0;
    lo = std::min(lo, t.height(x, 0.7));
    hi = std::max(hi, t.height(x, 0.7));
    slope = std::max(slope, t.gradient(x, 0.7).norm());
  }
  EXPECT_NEAR(0.5 * (hi - lo), 0.0647, 1e-4);
  EXPECT_NEAR(std::atan(slope) / kDeg, 11.5, 0.1);
}

TEST(Terrain, GradientMatchesFiniteDifferences) {
  const double h = 1e-6;
  for (TerrainKind kind : {TerrainKind::kPerlin, TerrainKind::kSinusoidal}) {
    const Terrain t = make_terrain(kind, {}, 4);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 200; ++k) {
      const double x = u(rng), y = u(rng);
      const Vec2 fd((t.height(x + h, y) - t.height(x - h, y)) / (2 * h),
                    (t.height(x, y + h) - t.height(x, y - h)) / (2 * h));
      EXPECT_LE((fd - t.gradient(x, y)).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_NEAR(t.normal(x, y).norm(), 1.0, 1e-12);
    }
  }
}

TEST(Terrain, HeightfieldBoundsAndSeed) {
  const TerrainParams p{};
  const Terrain a = make_terrain(TerrainKind::kHeightfield, p, 42);
  const Terrain b = make_terrain(TerrainKind::kHeightfield, p, 42);
  const Terrain c = make_terrain(TerrainKind::kHeightfield, p, 43);
  EXPECT_GE(a.heightfield_amplitude(), p.heightfield_amplitude_min);
  EXPECT_LE(a.heightfield_amplitude(), p.heightfield_amplitude_max);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  bool differs = false;
  for (int k = 0; k < 2000; ++k) {
    const double x = u(rng), y = u(rng);
    const double h = a.height(x, y);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, a.heightfield_amplitude());
    EXPECT_EQ(h, b.height(x, y));
    differs |= h != c.height(x, y);
  }
  EXPECT_TRUE(differs);
}

TEST(Terrain, PlatformTiltIsBounded) {
  Terrain t = make_terrain(TerrainKind::kTabletop, {}, 0);
  EXPECT_TRUE(t.is_dynamic());
  for (int k = 0; k < 2000; ++k) {
    t.apply_load(Vec3(3.0, 1.0, 0.0), Vec3(0.0, 0.0, -2000.0));
    t.step(1e-3);
  }
  EXPECT_GT(t.tilt().norm(), 0.0);
  EXPECT_LE(t.tilt().cwiseAbs().maxCoeff(), t.max_tilt() + 1e-12);
}

TEST(Terrain, NamesRoundTrip) {
  for (const char* n : {"flat", "heightfield", "perlin", "tabletop", "seesaw", "sinusoidal", "stairs"}) {
    EXPECT_EQ(to_string(terrain_kind_from_string(n)), n);
  }
  EXPECT_THROW(terrain_kind_from_string("lava"), std::invalid_argument);
}

TEST(Terrain, GridCsv) {
  std::ostringstream os;
  make_terrain(TerrainKind::kFlat, {}, 0).write_grid_csv(os, 0.0, 1.0, 0.0, 1.0, 0.5);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  std::getline(is, line);
  EXPECT_EQ(line, "x,y,height");
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 9);
}

}  // namespace
}  // namespace resloco::sim
