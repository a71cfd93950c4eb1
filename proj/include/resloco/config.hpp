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

// Run configuration: a JSON file layered over built-in defaults, then
// environment overrides. Unknown keys are rejected.

#ifndef RESLOCO_CONFIG_HPP_
#define RESLOCO_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "resloco/eval.hpp"
#include "resloco/kernel.hpp"
#include "resloco/residual.hpp"
#include "resloco/sim.hpp"

namespace resloco {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AppConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 1;

  sim::SimConfig sim{};
  sim::TerrainParams terrain{};
  sim::TaskConfig task{};  // eval episodes: timeout, PD gains, reward, perturbations

  kernel::CollectConfig collect{};
  kernel::HParams kernel{};
  rl::TrainConfig agent{};
  eval::PerturbConfig perturb{};
  eval::SweepTiming sweep{};
};

/// Defaults for evaluation episodes (timeout 120 s).
AppConfig default_config();

/// Merges a JSON document into `cfg`. Throws ConfigError on unknown keys,
/// wrong types or values that fail validation.
void apply_json(AppConfig& cfg, const std::string& json_text);
void load_config_file(AppConfig& cfg, const std::string& path);

/// RESLOCO_OUT_DIR and RESLOCO_WORKERS.
void apply_environment(AppConfig& cfg);

/// Fully resolved configuration as pretty-printed JSON.
std::string to_json(const AppConfig& cfg);

/// FNV-1a of to_json(cfg).
std::uint64_t config_hash(const AppConfig& cfg);

/// Writes manifest.json-style content: tool version, command line, seed,
/// config hash and the resolved config.
void write_manifest(const std::string& path, const std::string& command, const std::vector<std::string>& args,
                    const AppConfig& cfg);

}  // namespace resloco

#endif  // RESLOCO_CONFIG_HPP_
