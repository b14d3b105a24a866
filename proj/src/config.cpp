#include "saferl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace saferl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" +
                                value + "'");
  }
  if (pos != value.size())
    throw std::invalid_argument("config: trailing junk for " + key + ": '" +
                                value + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v)
    throw std::invalid_argument("config: " + key + " must be an integer");
  return l;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(parse_long(key, item)));
  }
  if (out.empty())
    throw std::invalid_argument("config: " + key + " must be non-empty");
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "algorithm",        "cost_limit",       "reward_discount",
      "cost_discount",    "warmup_ratio",     "batch_size",
      "critic_lr",        "actor_lr",         "safe_critic_lr",
      "safe_actor_lr",    "multiplier_lr",    "multiplier_init",
      "policy_delay",     "multiplier_delay", "penalty_factor",
      "total_steps",      "eval_interval",    "eval_episodes",
      "seed",             "exploration_std",  "polyak_tau",
      "smoothing_std",    "smoothing_clip",   "hidden_sizes",
      "start_steps",      "buffer_capacity",  "env_dt",
      "env_a_max",        "env_v_max",        "env_wheelbase",
      "env_max_steer",    "env_horizon",      "env_speed_limit",
      "env_lateral_penalty", "env_reset_y_range"};
  return keys;
}

}  // namespace

std::string to_string(Algo a) {
  switch (a) {
    case Algo::td3: return "td3";
    case Algo::safety_layer: return "safety_layer";
    case Algo::recovery: return "recovery";
    case Algo::lagrangian: return "lagrangian";
    case Algo::fac: return "fac";
    case Algo::epo: return "epo";
  }
  throw std::logic_error("unknown algorithm");
}

Algo algo_from_string(const std::string& name) {
  if (name == "td3") return Algo::td3;
  if (name == "safety_layer") return Algo::safety_layer;
  if (name == "recovery") return Algo::recovery;
  if (name == "lagrangian") return Algo::lagrangian;
  if (name == "fac") return Algo::fac;
  if (name == "epo") return Algo::epo;
  throw std::invalid_argument("config: unknown algorithm '" + name + "'");
}

HyperConfig defaults(Algo algorithm) {
  HyperConfig cfg;
  cfg.algorithm = algorithm;
  if (algorithm == Algo::safety_layer) cfg.cost_limit = 0.02;
  return cfg;
}

void apply_key_value(HyperConfig& cfg, const std::string& key,
                     const std::string& value) {
  if (key == "algorithm") {
    cfg.algorithm = algo_from_string(value);
  } else if (key == "cost_limit") {
    cfg.cost_limit = parse_double(key, value);
  } else if (key == "reward_discount") {
    cfg.reward_discount = parse_double(key, value);
  } else if (key == "cost_discount") {
    cfg.cost_discount = parse_double(key, value);
  } else if (key == "warmup_ratio") {
    cfg.warmup_ratio = parse_double(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = static_cast<int>(parse_long(key, value));
  } else if (key == "critic_lr") {
    cfg.critic_lr = parse_double(key, value);
  } else if (key == "actor_lr") {
    cfg.actor_lr = parse_double(key, value);
  } else if (key == "safe_critic_lr") {
    cfg.safe_critic_lr = parse_double(key, value);
  } else if (key == "safe_actor_lr") {
    cfg.safe_actor_lr = parse_double(key, value);
  } else if (key == "multiplier_lr") {
    cfg.multiplier_lr = parse_double(key, value);
  } else if (key == "multiplier_init") {
    cfg.multiplier_init = parse_double(key, value);
  } else if (key == "policy_delay") {
    cfg.policy_delay = static_cast<int>(parse_long(key, value));
  } else if (key == "multiplier_delay") {
    cfg.multiplier_delay = static_cast<int>(parse_long(key, value));
  } else if (key == "penalty_factor") {
    cfg.penalty_factor = parse_double(key, value);
  } else if (key == "total_steps") {
    cfg.total_steps = parse_long(key, value);
  } else if (key == "eval_interval") {
    cfg.eval_interval = parse_long(key, value);
  } else if (key == "eval_episodes") {
    cfg.eval_episodes = static_cast<int>(parse_long(key, value));
  } else if (key == "seed") {
    cfg.seed = parse_long(key, value);
  } else if (key == "exploration_std") {
    cfg.exploration_std = parse_double(key, value);
  } else if (key == "polyak_tau") {
    cfg.polyak_tau = parse_double(key, value);
  } else if (key == "smoothing_std") {
    cfg.smoothing_std = parse_double(key, value);
  } else if (key == "smoothing_clip") {
    cfg.smoothing_clip = parse_double(key, value);
  } else if (key == "hidden_sizes") {
    cfg.hidden_sizes = parse_int_list(key, value);
  } else if (key == "start_steps") {
    cfg.start_steps = parse_long(key, value);
  } else if (key == "buffer_capacity") {
    cfg.buffer_capacity = parse_long(key, value);
  } else if (key == "env_dt") {
    cfg.env.dt = parse_double(key, value);
  } else if (key == "env_a_max") {
    cfg.env.a_max = parse_double(key, value);
  } else if (key == "env_v_max") {
    cfg.env.v_max = parse_double(key, value);
  } else if (key == "env_wheelbase") {
    cfg.env.wheelbase = parse_double(key, value);
  } else if (key == "env_max_steer") {
    cfg.env.max_steer = parse_double(key, value);
  } else if (key == "env_horizon") {
    cfg.env.horizon = static_cast<int>(parse_long(key, value));
  } else if (key == "env_speed_limit") {
    cfg.env.speed_limit = parse_double(key, value);
  } else if (key == "env_lateral_penalty") {
    cfg.env.lateral_penalty = parse_double(key, value);
  } else if (key == "env_reset_y_range") {
    cfg.env.reset_y_range = parse_double(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

void validate(const HyperConfig& cfg) {
  auto range_error = [](const std::string& field, const std::string& what) {
    throw std::out_of_range("config: " + field + " " + what);
  };
  if (cfg.reward_discount <= 0.0 || cfg.reward_discount >= 1.0)
    range_error("reward_discount", "must be in (0, 1)");
  if (cfg.cost_discount <= 0.0 || cfg.cost_discount >= 1.0)
    range_error("cost_discount", "must be in (0, 1)");
  if (cfg.cost_limit <= 0.0) range_error("cost_limit", "must be > 0");
  if (cfg.warmup_ratio < 0.0 || cfg.warmup_ratio > 1.0)
    range_error("warmup_ratio", "must be in [0, 1]");
  if (cfg.batch_size < 1) range_error("batch_size", "must be >= 1");
  if (cfg.critic_lr <= 0.0) range_error("critic_lr", "must be > 0");
  if (cfg.actor_lr <= 0.0) range_error("actor_lr", "must be > 0");
  if (cfg.safe_critic_lr <= 0.0) range_error("safe_critic_lr", "must be > 0");
  if (cfg.safe_actor_lr <= 0.0) range_error("safe_actor_lr", "must be > 0");
  if (cfg.multiplier_lr <= 0.0) range_error("multiplier_lr", "must be > 0");
  if (cfg.multiplier_init < 0.0)
    range_error("multiplier_init", "must be >= 0");
  if (cfg.policy_delay < 1) range_error("policy_delay", "must be >= 1");
  if (cfg.multiplier_delay < 1)
    range_error("multiplier_delay", "must be >= 1");
  if (cfg.penalty_factor < 0.0) range_error("penalty_factor", "must be >= 0");
  if (cfg.total_steps < 1) range_error("total_steps", "must be >= 1");
  if (cfg.eval_interval < 1) range_error("eval_interval", "must be >= 1");
  if (cfg.eval_episodes < 1) range_error("eval_episodes", "must be >= 1");
  if (cfg.exploration_std < 0.0)
    range_error("exploration_std", "must be >= 0");
  if (cfg.polyak_tau <= 0.0 || cfg.polyak_tau > 1.0)
    range_error("polyak_tau", "must be in (0, 1]");
  if (cfg.smoothing_std < 0.0) range_error("smoothing_std", "must be >= 0");
  if (cfg.smoothing_clip < 0.0) range_error("smoothing_clip", "must be >= 0");
  for (int h : cfg.hidden_sizes)
    if (h < 1) range_error("hidden_sizes", "entries must be >= 1");
  if (cfg.start_steps < 0) range_error("start_steps", "must be >= 0");
  if (cfg.buffer_capacity < 1)
    range_error("buffer_capacity", "must be >= 1");
  if (cfg.env.dt <= 0.0) range_error("env_dt", "must be > 0");
  if (cfg.env.a_max <= 0.0) range_error("env_a_max", "must be > 0");
  if (cfg.env.v_max <= 0.0) range_error("env_v_max", "must be > 0");
  if (cfg.env.wheelbase <= 0.0) range_error("env_wheelbase", "must be > 0");
  if (cfg.env.max_steer <= 0.0) range_error("env_max_steer", "must be > 0");
  if (cfg.env.horizon < 1) range_error("env_horizon", "must be >= 1");
  if (cfg.env.speed_limit <= 0.0)
    range_error("env_speed_limit", "must be > 0");
  if (cfg.env.lateral_penalty < 0.0)
    range_error("env_lateral_penalty", "must be >= 0");
  if (cfg.env.reset_y_range < 0.0)
    range_error("env_reset_y_range", "must be >= 0");
  if (cfg.algorithm == Algo::recovery &&
      (cfg.cost_limit <= 0.0 || cfg.cost_limit >= 1.0))
    range_error("cost_limit", "must be in (0, 1) for recovery");
}

HyperConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  HyperConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    apply_key_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  // SAFERL_<key> environment overrides.
  for (const auto& key : known_keys()) {
    if (const char* v = std::getenv(("SAFERL_" + key).c_str()))
      apply_key_value(cfg, key, v);
  }
  validate(cfg);
  return cfg;
}

std::string to_key_value_string(const HyperConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "algorithm = " << to_string(cfg.algorithm) << "\n"
     << "cost_limit = " << cfg.cost_limit << "\n"
     << "reward_discount = " << cfg.reward_discount << "\n"
     << "cost_discount = " << cfg.cost_discount << "\n"
     << "warmup_ratio = " << cfg.warmup_ratio << "\n"
     << "batch_size = " << cfg.batch_size << "\n"
     << "critic_lr = " << cfg.critic_lr << "\n"
     << "actor_lr = " << cfg.actor_lr << "\n"
     << "safe_critic_lr = " << cfg.safe_critic_lr << "\n"
     << "safe_actor_lr = " << cfg.safe_actor_lr << "\n"
     << "multiplier_lr = " << cfg.multiplier_lr << "\n"
     << "multiplier_init = " << cfg.multiplier_init << "\n"
     << "policy_delay = " << cfg.policy_delay << "\n"
     << "multiplier_delay = " << cfg.multiplier_delay << "\n"
     << "penalty_factor = " << cfg.penalty_factor << "\n"
     << "total_steps = " << cfg.total_steps << "\n"
     << "eval_interval = " << cfg.eval_interval << "\n"
     << "eval_episodes = " << cfg.eval_episodes << "\n"
     << "seed = " << cfg.seed << "\n"
     << "exploration_std = " << cfg.exploration_std << "\n"
     << "polyak_tau = " << cfg.polyak_tau << "\n"
     << "smoothing_std = " << cfg.smoothing_std << "\n"
     << "smoothing_clip = " << cfg.smoothing_clip << "\n";
  os << "hidden_sizes = ";
  for (std::size_t i = 0; i < cfg.hidden_sizes.size(); ++i)
    os << (i ? "," : "") << cfg.hidden_sizes[i];
  os << "\n"
     << "start_steps = " << cfg.start_steps << "\n"
     << "buffer_capacity = " << cfg.buffer_capacity << "\n"
     << "env_dt = " << cfg.env.dt << "\n"
     << "env_a_max = " << cfg.env.a_max << "\n"
     << "env_v_max = " << cfg.env.v_max << "\n"
     << "env_wheelbase = " << cfg.env.wheelbase << "\n"
     << "env_max_steer = " << cfg.env.max_steer << "\n"
     << "env_horizon = " << cfg.env.horizon << "\n"
     << "env_speed_limit = " << cfg.env.speed_limit << "\n"
     << "env_lateral_penalty = " << cfg.env.lateral_penalty << "\n"
     << "env_reset_y_range = " << cfg.env.reset_y_range << "\n";
  return os.str();
}

void save_config(const HyperConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << to_key_value_string(cfg);
}

std::vector<std::string> irrelevant_fields(Algo algorithm) {
  switch (algorithm) {
    case Algo::td3:
      return {"cost_limit",       "warmup_ratio",  "safe_critic_lr",
              "safe_actor_lr",    "multiplier_lr", "multiplier_init",
              "multiplier_delay", "penalty_factor"};
    case Algo::safety_layer:
      return {"safe_actor_lr", "multiplier_lr", "multiplier_init",
              "multiplier_delay", "penalty_factor"};
    case Algo::recovery:
      return {"multiplier_lr", "multiplier_init", "multiplier_delay",
              "penalty_factor"};
    case Algo::lagrangian:
      return {"warmup_ratio", "safe_actor_lr", "multiplier_delay",
              "penalty_factor"};
    case Algo::fac:
      return {"warmup_ratio", "safe_actor_lr", "multiplier_init",
              "penalty_factor"};
    case Algo::epo:
      return {"warmup_ratio", "safe_actor_lr", "multiplier_lr",
              "multiplier_init", "multiplier_delay"};
  }
  return {};
}

}  // namespace saferl
