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

#ifndef RESLOCO_TERRAIN_HPP_
#define RESLOCO_TERRAIN_HPP_

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "resloco/types.hpp"

namespace resloco::sim {

enum class TerrainKind { kFlat, kHeightfield, kPerlin, kTabletop, kSeesaw, kSinusoidal, kStairs };

TerrainKind terrain_kind_from_string(std::string_view name);
std::string to_string(TerrainKind kind);

struct TerrainParams {
  // Random height field: per-terrain amplitude drawn from [min, max], each
  // cell uniform in [0, amplitude], bilinear in between.
  double heightfield_amplitude_min = 0.03;
  double heightfield_amplitude_max = 0.045;
  double heightfield_cell = 0.2;
  double heightfield_half_extent = 30.0;

  int perlin_octaves = 2;
  double perlin_wavelength = 1.5;
  double perlin_amplitude = 0.04;

  // Tabletop: disc platform tilting in any direction about a central pivot.
  double tabletop_max_deg = 5.0;
  double tabletop_radius = 8.0;

  // Seesaw: plank along x tilting about the y axis through its center.
  double seesaw_max_deg = 6.0;
  double seesaw_length = 6.0;
  double seesaw_width = 2.0;

  double sinusoid_max_incline_deg = 11.5;
  double sinusoid_wavelength = 2.0;

  // Stairs along +x: `stair_count` steps up, a plateau, then the same down.
  double stair_height = 0.04;
  double stair_tread = 0.3;
  double stair_start = 1.0;
  int stair_count = 8;
  double stair_plateau = 1.5;

  // Pivot dynamics shared by tabletop and seesaw.
  double pivot_inertia = 60.0;    // kg m^2
  double pivot_damping = 150.0;   // N m s / rad
  double pivot_stiffness = 0.0;   // N m / rad, self-centering
};

/// Height map with an optional tilting platform. Static terrains are pure
/// functions of (x, y); tabletop and seesaw carry a tilt state that the
/// simulator advances from the loads placed on them.
class Terrain {
 public:
  Terrain() = default;

  TerrainKind kind() const { return kind_; }
  const TerrainParams& params() const { return params_; }

  double height(double x, double y) const;
  Vec2 gradient(double x, double y) const;  // (dh/dx, dh/dy)
  Vec3 normal(double x, double y) const;

  bool is_dynamic() const { return kind_ == TerrainKind::kTabletop || kind_ == TerrainKind::kSeesaw; }
  /// Tilt about the world x and y axes, radians.
  const Vec2& tilt() const { return tilt_; }
  void set_tilt(const Vec2& tilt);
  /// Force exerted on the terrain at `point` (world). Accumulates until step().
  void apply_load(const Vec3& point, const Vec3& force);
  void step(double dt);
  double max_tilt() const;

  /// Amplitude of the sinusoid, solved from the max incline and wavelength.
  double sinusoid_amplitude() const;
  double heightfield_amplitude() const { return hf_amplitude_; }

  /// `x,y,height` rows on a regular grid.
  void write_grid_csv(std::ostream& os, double x0, double x1, double y0, double y1, double step) const;

  friend Terrain make_terrain(TerrainKind kind, const TerrainParams& params, std::uint64_t seed);

 private:
  double perlin(double x, double y) const;
  double platform_height(double x, double y) const;

  TerrainKind kind_ = TerrainKind::kFlat;
  TerrainParams params_{};
  // heightfield
  std::vector<double> grid_;
  int grid_n_ = 0;
  double hf_amplitude_ = 0.0;
  // perlin
  std::array<std::uint8_t, 512> perm_{};
  // platform
  Vec2 tilt_ = Vec2::Zero();
  Vec2 tilt_rate_ = Vec2::Zero();
  Vec2 load_torque_ = Vec2::Zero();
};

/// Deterministic for a given seed. Throws std::invalid_argument on bad params.
Terrain make_terrain(TerrainKind kind, const TerrainParams& params, std::uint64_t seed);

}  // namespace resloco::sim

#endif  // RESLOCO_TERRAIN_HPP_
