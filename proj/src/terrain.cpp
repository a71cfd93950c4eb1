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

#include "resloco/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace resloco::sim {

namespace {

double deg2rad(double d) { return d * kPi / 180.0; }

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double lerp(double a, double b, double t) { return a + t * (b - a); }

double grad2(std::uint8_t hash, double x, double y) {
  // Eight unit-ish gradient directions.
  switch (hash & 7) {
    case 0: return x + y;
    case 1: return -x + y;
    case 2: return x - y;
    case 3: return -x - y;
    case 4: return x;
    case 5: return -x;
    case 6: return y;
    default: return -y;
  }
}

}  // namespace

TerrainKind terrain_kind_from_string(std::string_view name) {
  if (name == "flat") return TerrainKind::kFlat;
  if (name == "heightfield") return TerrainKind::kHeightfield;
  if (name == "perlin") return TerrainKind::kPerlin;
  if (name == "tabletop") return TerrainKind::kTabletop;
  if (name == "seesaw") return TerrainKind::kSeesaw;
  if (name == "sinusoidal") return TerrainKind::kSinusoidal;
  if (name == "stairs") return TerrainKind::kStairs;
  throw std::invalid_argument(fmt::format("unknown terrain '{}'", name));
}

std::string to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::kFlat: return "flat";
    case TerrainKind::kHeightfield: return "heightfield";
    case TerrainKind::kPerlin: return "perlin";
    case TerrainKind::kTabletop: return "tabletop";
    case TerrainKind::kSeesaw: return "seesaw";
    case TerrainKind::kSinusoidal: return "sinusoidal";
    case TerrainKind::kStairs: return "stairs";
  }
  return "unknown";
}

Terrain make_terrain(TerrainKind kind, const TerrainParams& p, std::uint64_t seed) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(fmt::format("terrain: invalid parameter: {}", what));
  };
  Terrain t;
  t.kind_ = kind;
  t.params_ = p;
  std::mt19937_64 rng(seed);
  switch (kind) {
    case TerrainKind::kFlat: break;
    case TerrainKind::kHeightfield: {
      require(p.heightfield_amplitude_min >= 0.0 && p.heightfield_amplitude_max >= p.heightfield_amplitude_min,
              "heightfield amplitude range");
      require(p.heightfield_cell > 0.0 && p.heightfield_half_extent > p.heightfield_cell, "heightfield grid");
      std::uniform_real_distribution<double> amp(p.heightfield_amplitude_min, p.heightfield_amplitude_max);
      t.hf_amplitude_ = amp(rng);
      t.grid_n_ = static_cast<int>(std::ceil(2.0 * p.heightfield_half_extent / p.heightfield_cell)) + 1;
      t.grid_.resize(static_cast<std::size_t>(t.grid_n_) * t.grid_n_);
      std::uniform_real_distribution<double> cell(0.0, t.hf_amplitude_);
      for (double& h : t.grid_) h = cell(rng);
      break;
    }
    case TerrainKind::kPerlin: {
      require(p.perlin_octaves >= 1 && p.perlin_wavelength > 0.0 && p.perlin_amplitude >= 0.0, "perlin");
      std::array<std::uint8_t, 256> base{};
      std::iota(base.begin(), base.end(), 0);
      std::shuffle(base.begin(), base.end(), rng);
      for (int i = 0; i < 512; ++i) t.perm_[i] = base[i & 255];
      break;
    }
    case TerrainKind::kTabletop:
      require(p.tabletop_max_deg > 0.0 && p.tabletop_max_deg < 45.0 && p.tabletop_radius > 0.0, "tabletop");
      require(p.pivot_inertia > 0.0 && p.pivot_damping >= 0.0, "pivot dynamics");
      break;
    case TerrainKind::kSeesaw:
      require(p.seesaw_max_deg > 0.0 && p.seesaw_max_deg < 45.0 && p.seesaw_length > 0.0 && p.seesaw_width > 0.0,
              "seesaw");
      require(p.pivot_inertia > 0.0 && p.pivot_damping >= 0.0, "pivot dynamics");
      // Rests on its +x end until loaded.
      t.tilt_ = Vec2(0.0, deg2rad(p.seesaw_max_deg));
      break;
    case TerrainKind::kSinusoidal:
      require(p.sinusoid_wavelength > 0.0 && p.sinusoid_max_incline_deg > 0.0 && p.sinusoid_max_incline_deg < 90.0,
              "sinusoid");
      break;
    case TerrainKind::kStairs:
      require(p.stair_height >= 0.0 && p.stair_tread > 0.0 && p.stair_count >= 1 && p.stair_plateau >= 0.0, "stairs");
      break;
  }
  return t;
}

double Terrain::sinusoid_amplitude() const {
  return params_.sinusoid_wavelength * std::tan(deg2rad(params_.sinusoid_max_incline_deg)) / (2.0 * kPi);
}

double Terrain::max_tilt() const {
  if (kind_ == TerrainKind::kTabletop) return deg2rad(params_.tabletop_max_deg);
  if (kind_ == TerrainKind::kSeesaw) return deg2rad(params_.seesaw_max_deg);
  return 0.0;
}

double Terrain::perlin(double x, double y) const {
  const double fx = std::floor(x), fy = std::floor(y);
  const int xi = static_cast<int>(fx) & 255, yi = static_cast<int>(fy) & 255;
  const double xf = x - fx, yf = y - fy;
  const double u = fade(xf), v = fade(yf);
  const std::uint8_t aa = perm_[perm_[xi] + yi], ab = perm_[perm_[xi] + yi + 1];
  const std::uint8_t ba = perm_[perm_[xi + 1] + yi], bb = perm_[perm_[xi + 1] + yi + 1];
  const double x1 = lerp(grad2(aa, xf, yf), grad2(ba, xf - 1.0, yf), u);
  const double x2 = lerp(grad2(ab, xf, yf - 1.0), grad2(bb, xf - 1.0, yf - 1.0), u);
  return lerp(x1, x2, v);
}

double Terrain::platform_height(double x, double y) const {
  if (kind_ == TerrainKind::kTabletop) {
    if (x * x + y * y > params_.tabletop_radius * params_.tabletop_radius) return 0.0;
    return -x * std::tan(tilt_.y()) + y * std::tan(tilt_.x());
  }
  const double half_l = params_.seesaw_length / 2.0;
  if (std::abs(x) > half_l || std::abs(y) > params_.seesaw_width / 2.0) return 0.0;
  const double pivot_z = half_l * std::tan(max_tilt());
  return pivot_z - x * std::tan(tilt_.y());
}

double Terrain::height(double x, double y) const {
  switch (kind_) {
    case TerrainKind::kFlat: return 0.0;
    case TerrainKind::kHeightfield: {
      const double c = params_.heightfield_cell;
      const double gx = std::clamp((x + params_.heightfield_half_extent) / c, 0.0, grid_n_ - 1.000001);
      const double gy = std::clamp((y + params_.heightfield_half_extent) / c, 0.0, grid_n_ - 1.000001);
      const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
      const double tx = gx - ix, ty = gy - iy;
      auto at = [&](int i, int j) { return grid_[static_cast<std::size_t>(j) * grid_n_ + i]; };
      return lerp(lerp(at(ix, iy), at(ix + 1, iy), tx), lerp(at(ix, iy + 1), at(ix + 1, iy + 1), tx), ty);
    }
    case TerrainKind::kPerlin: {
      double h = 0.0, norm = 0.0, amp = 1.0, freq = 1.0 / params_.perlin_wavelength;
      for (int o = 0; o < params_.perlin_octaves; ++o) {
        h += amp * perlin(x * freq, y * freq);
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
      }
      return params_.perlin_amplitude * h / norm;
    }
    case TerrainKind::kTabletop:
    case TerrainKind::kSeesaw: return platform_height(x, y);
    case TerrainKind::kSinusoidal: return sinusoid_amplitude() * std::sin(2.0 * kPi * x / params_.sinusoid_wavelength);
    case TerrainKind::kStairs: {
      const double tread = params_.stair_tread;
      const double x0 = params_.stair_start;
      const double x1 = x0 + 2.0 * params_.stair_count * tread + params_.stair_plateau;
      if (x < x0 || x > x1) return 0.0;
      const double up = std::floor((x - x0) / tread) + 1.0;
      const double down = std::floor((x1 - x) / tread) + 1.0;
      return params_.stair_height * std::min({up, down, static_cast<double>(params_.stair_count)});
    }
  }
  return 0.0;
}

Vec2 Terrain::gradient(double x, double y) const {
  switch (kind_) {
    case TerrainKind::kFlat:
    case TerrainKind::kStairs: return Vec2::Zero();
    case TerrainKind::kSinusoidal: {
      const double k = 2.0 * kPi / params_.sinusoid_wavelength;
      return {sinusoid_amplitude() * k * std::cos(k * x), 0.0};
    }
    case TerrainKind::kTabletop:
      if (x * x + y * y > params_.tabletop_radius * params_.tabletop_radius) return Vec2::Zero();
      return {-std::tan(tilt_.y()), std::tan(tilt_.x())};
    case TerrainKind::kSeesaw:
      if (std::abs(x) > params_.seesaw_length / 2.0 || std::abs(y) > params_.seesaw_width / 2.0) return Vec2::Zero();
      return {-std::tan(tilt_.y()), 0.0};
    case TerrainKind::kHeightfield:
    case TerrainKind::kPerlin: {
      constexpr double h = 1e-4;
      return {(height(x + h, y) - height(x - h, y)) / (2.0 * h), (height(x, y + h) - height(x, y - h)) / (2.0 * h)};
    }
  }
  return Vec2::Zero();
}

Vec3 Terrain::normal(double x, double y) const {
  const Vec2 g = gradient(x, y);
  return Vec3(-g.x(), -g.y(), 1.0).normalized();
}

void Terrain::set_tilt(const Vec2& tilt) {
  tilt_ = tilt;
  tilt_rate_.setZero();
}

void Terrain::apply_load(const Vec3& point, const Vec3& force) {
  if (!is_dynamic()) return;
  const double pivot_z = kind_ == TerrainKind::kSeesaw ? params_.seesaw_length / 2.0 * std::tan(max_tilt()) : 0.0;
  const Vec3 r = point - Vec3(0.0, 0.0, pivot_z);
  const Vec3 tau = r.cross(force);
  load_torque_ += tau.head<2>();
}

void Terrain::step(double dt) {
  if (!is_dynamic()) return;
  Vec2 torque = load_torque_ - params_.pivot_damping * tilt_rate_ - params_.pivot_stiffness * tilt_;
  if (kind_ == TerrainKind::kSeesaw) torque.x() = 0.0;
  tilt_rate_ += dt * torque / params_.pivot_inertia;
  tilt_ += dt * tilt_rate_;
  const double limit = max_tilt();
  if (kind_ == TerrainKind::kSeesaw) {
    tilt_.x() = 0.0;
    tilt_rate_.x() = 0.0;
    if (std::abs(tilt_.y()) > limit) {
      tilt_.y() = std::copysign(limit, tilt_.y());
      if (tilt_rate_.y() * tilt_.y() > 0.0) tilt_rate_.y() = 0.0;
    }
  } else if (tilt_.norm() > limit) {
    const Vec2 dir = tilt_.normalized();
    tilt_ = dir * limit;
    const double outward = tilt_rate_.dot(dir);
    if (outward > 0.0) tilt_rate_ -= outward * dir;
  }
  load_torque_.setZero();
}

void Terrain::write_grid_csv(std::ostream& os, double x0, double x1, double y0, double y1, double step) const {
  os << "x,y,height\n";
  const int nx = static_cast<int>(std::floor((x1 - x0) / step + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor((y1 - y0) / step + 1e-9)) + 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = x0 + i * step, y = y0 + j * step;
      os << fmt::format("{:.4f},{:.4f},{:.6f}\n", x, y, height(x, y));
    }
  }
}

}  // namespace resloco::sim
