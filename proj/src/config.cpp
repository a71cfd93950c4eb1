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

#include "resloco/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace resloco {

namespace {

using nlohmann::json;

template <typename T>
void read_value(const json& j, T& out, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError(path + ": expected a boolean");
      out = j.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
      if (std::is_unsigned_v<T> && j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)
        throw ConfigError(path + ": expected a non-negative integer");
      out = j.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw ConfigError(path + ": expected a number");
      out = j.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(path + ": expected a string");
      out = j.get<std::string>();
    } else if constexpr (std::is_same_v<T, Vec3>) {
      if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected an array of 3 numbers");
      for (int i = 0; i < 3; ++i) read_value(j[static_cast<std::size_t>(i)], out[i], path);
    } else if constexpr (std::is_same_v<T, std::array<double, kNumLegs>>) {
      if (!j.is_array() || j.size() != kNumLegs) throw ConfigError(path + ": expected an array of 4 numbers");
      for (std::size_t i = 0; i < kNumLegs; ++i) read_value(j[i], out[i], path);
    } else {
      if (!j.is_array()) throw ConfigError(path + ": expected an array");
      T v;
      for (const json& e : j) {
        typename T::value_type x{};
        read_value(e, x, path);
        v.push_back(x);
      }
      out = std::move(v);
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <typename T>
json write_value(const T& v) {
  if constexpr (std::is_same_v<T, Vec3>) {
    return json::array({v[0], v[1], v[2]});
  } else if constexpr (std::is_same_v<T, std::array<double, kNumLegs>>) {
    return json(std::vector<double>(v.begin(), v.end()));
  } else {
    return json(v);
  }
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void operator()(const char* key, T& v) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.insert(key);
    read_value(*it, v, path_ + "." + key);
  }

  template <typename F>
  void section(const char* key, F&& f) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.insert(key);
    Reader r(*it, path_ + "." + key);
    f(r);
    r.finish();
  }

  /// A gait is either a preset name or an object.
  template <typename F>
  void gait(const char* key, gait::GaitParams& g, F&& visit_fields) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.insert(key);
    if (it->is_string()) {
      try {
        g = gait::preset(it->get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path_ + "." + key + ": " + e.what());
      }
      return;
    }
    Reader r(*it, path_ + "." + key);
    visit_fields(r, g);
    r.finish();
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) {}

  template <typename T>
  void operator()(const char* key, const T& v) {
    j_[key] = write_value(v);
  }

  template <typename F>
  void section(const char* key, F&& f) {
    json sub = json::object();
    Writer w(sub);
    f(w);
    j_[key] = std::move(sub);
  }

  template <typename F>
  void gait(const char* key, gait::GaitParams& g, F&& visit_fields) {
    section(key, [&](Writer& w) { visit_fields(w, g); });
  }

 private:
  json& j_;
};

template <typename V>
void visit_gait(V& v, gait::GaitParams& g) {
  v("theta", g.theta);
  v("r_swing", g.r_swing);
  v("tau_stance", g.tau_stance);
}

template <typename V>
void visit_sim(V& v, sim::SimConfig& s) {
  v("physics_dt", s.physics_dt);
  v("control_dt", s.control_dt);
  v("command_dt", s.command_dt);
  v("gravity", s.gravity);
  v("base_mass", s.base_mass);
  v("base_inertia", s.base_inertia);
  v("joint_inertia", s.joint_inertia);
  v("contact_stiffness", s.contact_stiffness);
  v("contact_damping", s.contact_damping);
  v("tangential_stiffness", s.tangential_stiffness);
  v("tangential_damping", s.tangential_damping);
  v("friction", s.friction);
  v("torque_limit", s.torque_limit);
  v("fall_height", s.fall_height);
  v("fall_angle", s.fall_angle);
  v("sanity_velocity", s.sanity_velocity);
  v("body_half_extents", s.body_half_extents);
}

template <typename V>
void visit_terrain(V& v, sim::TerrainParams& t) {
  v("heightfield_amplitude_min", t.heightfield_amplitude_min);
  v("heightfield_amplitude_max", t.heightfield_amplitude_max);
  v("heightfield_cell", t.heightfield_cell);
  v("heightfield_half_extent", t.heightfield_half_extent);
  v("perlin_octaves", t.perlin_octaves);
  v("perlin_wavelength", t.perlin_wavelength);
  v("perlin_amplitude", t.perlin_amplitude);
  v("tabletop_max_deg", t.tabletop_max_deg);
  v("tabletop_radius", t.tabletop_radius);
  v("seesaw_max_deg", t.seesaw_max_deg);
  v("seesaw_length", t.seesaw_length);
  v("seesaw_width", t.seesaw_width);
  v("sinusoid_max_incline_deg", t.sinusoid_max_incline_deg);
  v("sinusoid_wavelength", t.sinusoid_wavelength);
  v("stair_height", t.stair_height);
  v("stair_tread", t.stair_tread);
  v("stair_start", t.stair_start);
  v("stair_count", t.stair_count);
  v("stair_plateau", t.stair_plateau);
  v("pivot_inertia", t.pivot_inertia);
  v("pivot_damping", t.pivot_damping);
  v("pivot_stiffness", t.pivot_stiffness);
}

template <typename V>
void visit_perturbation(V& v, sim::PerturbationSchedule& p) {
  v("enabled", p.enabled);
  v("interval_min", p.interval_min);
  v("interval_max", p.interval_max);
  v("magnitude_min", p.magnitude_min);
  v("magnitude_max", p.magnitude_max);
  v("duration", p.duration);
  v("max_pushes", p.max_pushes);
}

template <typename V>
void visit_rbf(V& v, const char* key, rl::RbfTerm& t) {
  v.section(key, [&](auto& s) {
    s("steepness", t.steepness);
    s("weight", t.weight);
  });
}

template <typename V>
void visit_reward(V& v, rl::RewardSpec& r) {
  visit_rbf(v, "linear_velocity", r.linear_velocity);
  visit_rbf(v, "angular_velocity", r.angular_velocity);
  visit_rbf(v, "com", r.com);
  visit_rbf(v, "distance", r.distance);
  visit_rbf(v, "attitude", r.attitude);
  v("com_target", r.com_target);
  v("fall_penalty", r.fall_penalty);
  v("target_bonus", r.target_bonus);
  v("d_min", r.d_min);
}

template <typename V>
void visit_task(V& v, sim::TaskConfig& t) {
  v.gait("gait", t.gait, [](auto& g, gait::GaitParams& p) { visit_gait(g, p); });
  v.section("pd", [&](auto& s) {
    s("kp", t.pd.kp);
    s("kd", t.pd.kd);
  });
  v.section("perturbation", [&](auto& s) { visit_perturbation(s, t.perturbation); });
  v.section("reward", [&](auto& s) { visit_reward(s, t.reward); });
  v.section("pursuit", [&](auto& s) {
    s("k_distance", t.pursuit.k_distance);
    s("k_heading", t.pursuit.k_heading);
  });
  v("timeout", t.timeout);
  v("d_min", t.d_min);
  v("target_distance_min", t.target_distance_min);
  v("target_distance_max", t.target_distance_max);
}

template <typename V>
void visit_collect(V& v, kernel::CollectConfig& c) {
  v.gait("gait", c.gait, [](auto& g, gait::GaitParams& p) { visit_gait(g, p); });
  v("target_distance_min", c.target_distance_min);
  v("target_distance_max", c.target_distance_max);
  v("target_timeout", c.target_timeout);
  v("max_discards", c.max_discards);
}

template <typename V>
void visit_kernel(V& v, kernel::HParams& h) {
  v("lr", h.lr);
  v("lr_final_fraction", h.lr_final_fraction);
  v("dropout", h.dropout);
  v("weight_decay", h.weight_decay);
  v("momentum", h.momentum);
  v("batch_size", h.batch_size);
  v("hidden", h.hidden);
  v("val_fraction", h.val_fraction);
}

template <typename V>
void visit_ppo(V& v, rl::PpoHParams& p) {
  v("lr", p.lr);
  v("lr_exp_decay", p.lr_exp_decay);
  v("entropy_coef", p.entropy_coef);
  v("value_coef", p.value_coef);
  v("max_grad_norm", p.max_grad_norm);
  v("epochs", p.epochs);
  v("rollout", p.rollout);
  v("batch", p.batch);
  v("gamma", p.gamma);
  v("gae_lambda", p.gae_lambda);
  v("clip_eps", p.clip_eps);
}

template <typename V>
void visit_agent(V& v, rl::TrainConfig& a) {
  v.section("ppo", [&](auto& s) { visit_ppo(s, a.ppo); });
  v.section("policy", [&](auto& s) {
    s("features", a.policy.features);
    s("actor", a.policy.actor);
    s("critic", a.policy.critic);
    s("action_scale", a.policy.action_scale);
    s("log_std_init", a.policy.log_std_init);
  });
  v("total_timesteps", a.total_timesteps);
  v("n_envs", a.n_envs);
  v.gait("gait", a.gait, [](auto& g, gait::GaitParams& p) { visit_gait(g, p); });
  v("episode_seconds", a.episode_seconds);
  v("flat_only", a.flat_only);
  v("heightfield_prob", a.heightfield_prob);
  v("episodes_per_terrain", a.episodes_per_terrain);
  v.section("perturbation", [&](auto& s) { visit_perturbation(s, a.perturbation); });
  v("target_distance_min", a.target_distance_min);
  v("target_distance_max", a.target_distance_max);
  v("success_targets", a.success_targets);
}

template <typename V>
void visit_root(V& v, AppConfig& c) {
  v("seed", c.seed);
  v("out_dir", c.out_dir);
  v("workers", c.workers);
  v.section("sim", [&](auto& s) { visit_sim(s, c.sim); });
  v.section("terrain", [&](auto& s) { visit_terrain(s, c.terrain); });
  v.section("task", [&](auto& s) { visit_task(s, c.task); });
  v.section("collect", [&](auto& s) { visit_collect(s, c.collect); });
  v.section("kernel", [&](auto& s) { visit_kernel(s, c.kernel); });
  v.section("agent", [&](auto& s) { visit_agent(s, c.agent); });
  v.section("perturb_eval", [&](auto& s) {
    s("target_distance", c.perturb.target_distance);
    s("push_time_min", c.perturb.push_time_min);
    s("push_time_max", c.perturb.push_time_max);
    s("timeout", c.perturb.timeout);
  });
  v.section("sweep", [&](auto& s) {
    s("settle_extra", c.sweep.settle_extra);
    s("measure", c.sweep.measure);
  });
}

void validate(const AppConfig& c) {
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  try {
    c.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.kernel.batch_size < 1 || c.kernel.hidden.empty()) throw ConfigError("kernel: batch_size and hidden must be set");
  if (!(c.kernel.val_fraction > 0.0 && c.kernel.val_fraction < 1.0)) throw ConfigError("kernel: val_fraction in (0,1)");
  const rl::PpoHParams& p = c.agent.ppo;
  if (p.batch < 1 || p.rollout < p.batch || p.rollout % p.batch != 0)
    throw ConfigError("agent.ppo: rollout must be a positive multiple of batch");
  if (c.agent.n_envs < 1) throw ConfigError("agent: n_envs must be >= 1");
  if (c.agent.policy.features.empty()) throw ConfigError("agent.policy: features needs a layer");
  for (const gait::GaitParams* g : {&c.task.gait, &c.collect.gait, &c.agent.gait}) {
    if (!(g->r_swing > 0.0 && g->r_swing < 1.0) || !(g->tau_stance > 0.0)) throw ConfigError("gait: invalid r_swing or tau_stance");
  }
  if (c.task.timeout <= 0.0) throw ConfigError("task: timeout must be positive");
}

}  // namespace

AppConfig default_config() {
  AppConfig c;
  c.task.timeout = 120.0;
  return c;
}

void apply_json(AppConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Reader r(j, "config");
  visit_root(r, cfg);
  r.finish();
  validate(cfg);
}

void load_config_file(AppConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_json(cfg, ss.str());
}

void apply_environment(AppConfig& cfg) {
  if (const char* dir = std::getenv("RESLOCO_OUT_DIR"); dir && *dir) cfg.out_dir = dir;
  if (const char* w = std::getenv("RESLOCO_WORKERS"); w && *w) {
    char* end = nullptr;
    const long n = std::strtol(w, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw ConfigError("RESLOCO_WORKERS must be a positive integer");
    cfg.workers = static_cast<int>(n);
  }
}

std::string to_json(const AppConfig& cfg) {
  AppConfig copy = cfg;
  json j = json::object();
  Writer w(j);
  visit_root(w, copy);
  return j.dump(2);
}

std::uint64_t config_hash(const AppConfig& cfg) {
  const std::string s = to_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const std::string& path, const std::string& command, const std::vector<std::string>& args,
                    const AppConfig& cfg) {
  json m = json::object();
  m["tool"] = "resloco";
  m["version"] = kVersion;
  m["command"] = command;
  m["args"] = args;
  m["seed"] = cfg.seed;
  std::ostringstream hash;
  hash << std::hex << config_hash(cfg);
  m["config_hash"] = hash.str();
  m["config"] = json::parse(to_json(cfg));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  out << m.dump(2) << "\n";
}

}  // namespace resloco
