#pragma once

#include <string>
#include <vector>

#include "saferl/env.hpp"

namespace saferl {

enum class Algo { td3, safety_layer, recovery, lagrangian, fac, epo };

std::string to_string(Algo a);
Algo algo_from_string(const std::string& name);

// Every tunable of the toolkit. Defaults are the benchmark's standard
// hyperparameter table plus the documented backbone and environment
// constants.
struct HyperConfig {
  Algo algorithm = Algo::td3;
  double cost_limit = 0.1;  // 0.02 for the safety layer
  double reward_discount = 0.99;
  double cost_discount = 0.99;
  double warmup_ratio = 0.2;  // safety layer and recovery only
  int batch_size = 256;
  double critic_lr = 3e-4;
  double actor_lr = 3e-4;
  double safe_critic_lr = 3e-4;
  double safe_actor_lr = 3e-4;
  double multiplier_lr = 1e-5;
  double multiplier_init = 0.0;
  int policy_delay = 2;
  int multiplier_delay = 12;
  double penalty_factor = 5.0;
  long total_steps = 500000;
  long eval_interval = 5000;
  int eval_episodes = 5;
  long seed = 0;
  double exploration_std = 0.1;
  double polyak_tau = 0.005;
  double smoothing_std = 0.2;
  double smoothing_clip = 0.5;
  std::vector<int> hidden_sizes = {256, 256};
  long start_steps = 1000;  // uniform random warm-start actions
  long buffer_capacity = 1000000;
  EnvConfig env;
};

// Per-algorithm defaults (the safety layer tightens cost_limit to 0.02).
HyperConfig defaults(Algo algorithm);

// Parses a UTF-8 `key = value` file ('#' comments, blank lines allowed).
// Unspecified keys keep their defaults; unknown keys and out-of-range values
// are rejected with an error naming the field. Environment variables of the
// form SAFERL_<key> override file values.
HyperConfig load_config(const std::string& path);

// Applies one key=value assignment to an existing config (also used for
// sweeps and env-var overrides).
void apply_key_value(HyperConfig& cfg, const std::string& key,
                     const std::string& value);

void validate(const HyperConfig& cfg);

void save_config(const HyperConfig& cfg, const std::string& path);
std::string to_key_value_string(const HyperConfig& cfg);

// Names of fields that the given algorithm never reads; the harness logs a
// notice when a config sets one of them away from its default.
std::vector<std::string> irrelevant_fields(Algo algorithm);

}  // namespace saferl
