#include "saferl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace saferl {

namespace {

std::mt19937_64 make_stream(long seed, int stream_id) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffff),
                    static_cast<unsigned>((seed >> 32) & 0xffffffff),
                    static_cast<unsigned>(stream_id)};
  return std::mt19937_64(seq);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::map<std::string, std::string> config_as_map(const HyperConfig& cfg) {
  std::map<std::string, std::string> out;
  std::istringstream in(to_key_value_string(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos)
      out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

void log_ignored_fields(const HyperConfig& cfg) {
  const auto set = config_as_map(cfg);
  const auto base = config_as_map(defaults(cfg.algorithm));
  for (const auto& field : irrelevant_fields(cfg.algorithm)) {
    const auto it = set.find(field);
    const auto jt = base.find(field);
    if (it != set.end() && jt != base.end() && it->second != jt->second)
      std::cerr << "[saferl] notice: " << field << " is ignored by "
                << to_string(cfg.algorithm) << "\n";
  }
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

double cost_rate(long cum_cost, long cum_steps) {
  if (cum_steps < 1)
    throw std::invalid_argument("cost_rate: cum_steps must be >= 1");
  return static_cast<double>(cum_cost) / static_cast<double>(cum_steps);
}

std::pair<double, double> evaluate(const EvalPolicy& policy,
                                   const EnvConfig& env_cfg, int n_episodes,
                                   std::uint64_t seed) {
  if (n_episodes < 1)
    throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  double sum_reward = 0.0;
  double sum_cost = 0.0;
  SpeedLimitEnv env(env_cfg);
  for (int ep = 0; ep < n_episodes; ++ep) {
    Eigen::VectorXd obs = env.reset(splitmix64(seed + ep));
    double c_prev = 0.0;
    for (int t = 0; t < env.horizon(); ++t) {
      const Eigen::VectorXd a = policy(obs, c_prev);
      const StepResult r = env.step(a.head<2>());
      sum_reward += r.reward;
      sum_cost += r.cost;
      c_prev = r.cost;
      obs = r.next_obs;
      if (r.done) break;
    }
  }
  return {sum_reward / n_episodes, sum_cost / n_episodes};
}

Experiment::Experiment(const HyperConfig& cfg)
    : cfg_(cfg),
      env_(cfg.env),
      core_(),
      buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
      env_rng_(make_stream(cfg.seed, 1)),
      explore_rng_(make_stream(cfg.seed, 2)),
      sample_rng_(make_stream(cfg.seed, 3)),
      smooth_rng_(make_stream(cfg.seed, 4)) {
  validate(cfg_);
  log_ignored_fields(cfg_);

  BackboneConfig bc;
  bc.gamma = cfg.reward_discount;
  bc.gamma_c = cfg.cost_discount;
  bc.sigma = cfg.exploration_std;
  bc.tau = cfg.polyak_tau;
  bc.actor_lr = cfg.actor_lr;
  bc.critic_lr = cfg.critic_lr;
  bc.safe_critic_lr = cfg.safe_critic_lr;
  bc.smoothing_std = cfg.smoothing_std;
  bc.smoothing_clip = cfg.smoothing_clip;
  bc.policy_delay = cfg.policy_delay;

  std::mt19937_64 init_rng = make_stream(cfg.seed, 0);
  const bool with_risk = cfg.algorithm == Algo::recovery;
  core_ = AgentCore::make(SpeedLimitEnv::kObsDim, SpeedLimitEnv::kActDim,
                          cfg.hidden_sizes, bc, with_risk, init_rng);

  switch (cfg.algorithm) {
    case Algo::safety_layer:
      cost_model_ = LinearCostModel::make(
          SpeedLimitEnv::kObsDim, SpeedLimitEnv::kActDim, cfg.hidden_sizes,
          cfg.cost_limit, cfg.safe_critic_lr, init_rng);
      break;
    case Algo::recovery:
      recovery_ = RecoveryPolicy::make(
          SpeedLimitEnv::kObsDim, SpeedLimitEnv::kActDim, cfg.hidden_sizes,
          cfg.cost_limit, cfg.warmup_ratio, cfg.safe_actor_lr, init_rng);
      break;
    case Algo::lagrangian:
      lambda_ = ScalarMultiplier{cfg.multiplier_init, cfg.multiplier_lr,
                                 cfg.cost_limit};
      break;
    case Algo::fac:
      mnet_ = MultiplierNet::make(SpeedLimitEnv::kObsDim, cfg.hidden_sizes,
                                  cfg.multiplier_lr, cfg.multiplier_delay,
                                  cfg.cost_limit, init_rng);
      break;
    case Algo::epo:
      penalty_ = PenaltyConfig{cfg.penalty_factor, cfg.cost_limit};
      break;
    case Algo::td3:
      break;
  }

  obs_ = env_.reset(env_rng_());
  t0_ = std::chrono::steady_clock::now();
}

ActionTriple Experiment::pick_action() {
  ActionTriple t;
  if (step_ < cfg_.start_steps) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd a(SpeedLimitEnv::kActDim);
    for (int i = 0; i < a.size(); ++i) a(i) = u(explore_rng_);
    t.a_exec = t.a_task = t.a_risk = a;
    return t;
  }
  switch (cfg_.algorithm) {
    case Algo::safety_layer: {
      const Eigen::VectorXd raw =
          select_action(core_, obs_, true, explore_rng_);
      Eigen::VectorXd a = raw;
      if (projection_active(step_, cfg_.total_steps, cfg_.warmup_ratio))
        a = project_action(*cost_model_, obs_, raw, c_prev_);
      t.a_task = raw;
      t.a_exec = t.a_risk = a;
      return t;
    }
    case Algo::recovery:
      return select_with_recovery(*recovery_, core_, obs_, step_,
                                  cfg_.total_steps, true, explore_rng_);
    default: {
      const Eigen::VectorXd a = select_action(core_, obs_, true, explore_rng_);
      t.a_exec = t.a_task = t.a_risk = a;
      return t;
    }
  }
}

void Experiment::update_phase() {
  if (step_ + 1 < cfg_.start_steps) return;
  if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) return;
  const Batch batch = buffer_.sample(cfg_.batch_size, sample_rng_);

  // Safe-critic regression first, then the reward critics, then the actor.
  switch (cfg_.algorithm) {
    case Algo::td3:
      break;  // no safety machinery
    case Algo::safety_layer:
      train_cost_model(*cost_model_, batch);
      break;
    case Algo::recovery:
      update_risk_critic(core_, batch);
      break;
    case Algo::lagrangian:
    case Algo::fac:
    case Algo::epo:
      update_cost_critic(core_, batch);
      break;
  }

  const Eigen::VectorXd targets = critic_target(core_, batch, smooth_rng_);
  update_reward_critics(core_, batch, targets);

  core_.update_count += 1;
  if (core_.update_count % cfg_.policy_delay == 0) {
    switch (cfg_.algorithm) {
      case Algo::td3:
      case Algo::safety_layer:
        update_actor_weighted(core_, batch.s, {});
        break;
      case Algo::recovery:
        update_task_actor(core_, batch);
        update_recovery_actor(*recovery_, core_, batch);
        break;
      case Algo::lagrangian:
        lagrangian_actor_loss(core_, *lambda_, batch);
        break;
      case Algo::fac:
        fac_actor_loss(core_, *mnet_, batch);
        break;
      case Algo::epo:
        epo_actor_loss(core_, penalty_, batch);
        break;
    }
    polyak_all(core_);
    if (recovery_)
      soft_update(recovery_->risk_actor_target, recovery_->risk_actor,
                  core_.cfg.tau);
  }

  // Dual updates run on the same mini-batch, after the primal phase.
  if (lambda_) {
    const double mean_qc = policy_cost_values(core_, batch.s).mean();
    *lambda_ = multiplier_update(*lambda_, mean_qc);
  }
  if (mnet_) multiplier_net_update(*mnet_, core_, batch, core_.update_count);
}

void Experiment::advance_one_step() {
  if (step_ >= cfg_.total_steps)
    throw std::logic_error("Experiment: run already complete");
  const ActionTriple act = pick_action();
  const StepResult res = env_.step(act.a_exec.head<2>());

  Transition tr;
  tr.s = obs_;
  tr.a_exec = act.a_exec;
  tr.s_next = res.next_obs;
  tr.r = res.reward;
  tr.c = res.cost;
  tr.d = res.done ? 1 : 0;
  tr.a_task = act.a_task;
  tr.a_risk = act.a_risk;
  tr.c_prev = c_prev_;
  buffer_.push(tr);

  cum_cost_ += res.cost;
  obs_ = res.next_obs;
  c_prev_ = res.cost;
  if (res.done) {
    obs_ = env_.reset(env_rng_());
    c_prev_ = 0;
  }

  update_phase();
  step_ += 1;
}

EvalPolicy Experiment::eval_policy() {
  switch (cfg_.algorithm) {
    case Algo::safety_layer:
      return [this](const Eigen::VectorXd& s, double c_prev) {
        std::mt19937_64 dummy;
        Eigen::VectorXd a = select_action(core_, s, false, dummy);
        if (projection_active(step_, cfg_.total_steps, cfg_.warmup_ratio))
          a = project_action(*cost_model_, s, a, c_prev);
        return a;
      };
    case Algo::recovery:
      return [this](const Eigen::VectorXd& s, double) {
        std::mt19937_64 dummy;
        const ActionTriple t = select_with_recovery(
            *recovery_, core_, s, step_, cfg_.total_steps, false, dummy);
        return t.a_exec;
      };
    default:
      return [this](const Eigen::VectorXd& s, double) {
        std::mt19937_64 dummy;
        return select_action(core_, s, false, dummy);
      };
  }
}

MetricsRecord Experiment::snapshot() {
  MetricsRecord rec;
  rec.step = step_;
  const std::uint64_t eval_seed =
      splitmix64(static_cast<std::uint64_t>(cfg_.seed) * 0x51f15eedull +
                 static_cast<std::uint64_t>(step_));
  const auto [ep_r, ep_c] =
      evaluate(eval_policy(), cfg_.env, cfg_.eval_episodes, eval_seed);
  rec.eval_ep_reward = ep_r;
  rec.eval_ep_cost = ep_c;
  rec.train_cost_rate = step_ > 0 ? cost_rate(cum_cost_, step_) : 0.0;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
          .count();
  return rec;
}

std::vector<MetricsRecord> Experiment::run() {
  std::vector<MetricsRecord> records;
  records.push_back(snapshot());
  while (step_ < cfg_.total_steps) {
    try {
      advance_one_step();
    } catch (const std::exception& e) {
      throw std::runtime_error("experiment failed at step " +
                               std::to_string(step_) + ": " + e.what());
    }
    if (step_ % cfg_.eval_interval == 0 || step_ == cfg_.total_steps)
      records.push_back(snapshot());
  }
  return records;
}

std::vector<MetricsRecord> run_experiment(const HyperConfig& cfg,
                                          const std::string& csv_path) {
  Experiment exp(cfg);
  std::vector<MetricsRecord> records = exp.run();
  if (!csv_path.empty()) write_csv(records, csv_path);
  return records;
}

std::string format_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "step,eval_ep_reward,eval_ep_cost,train_cost_rate,wall_seconds\n";
  char buf[64];
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += fmt_double(r.eval_ep_reward);
    out += ',';
    out += fmt_double(r.eval_ep_cost);
    out += ',';
    out += fmt_double(r.train_cost_rate);
    out += ',';
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_seconds);
    out += buf;
    out += '\n';
  }
  return out;
}

void write_csv(const std::vector<MetricsRecord>& records,
               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  out << format_csv(records);
}

std::vector<MetricsRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,", 0) != 0)
    throw std::runtime_error("read_csv: bad header in '" + path + "'");
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf", &r.step,
                    &r.eval_ep_reward, &r.eval_ep_cost, &r.train_cost_rate,
                    &r.wall_seconds) != 5)
      throw std::runtime_error("read_csv: bad row in '" + path + "'");
    records.push_back(r);
  }
  return records;
}

double final_window_mean(const std::vector<MetricsRecord>& records,
                         double MetricsRecord::*field, long total_steps,
                         double fraction) {
  const double cutoff = (1.0 - fraction) * static_cast<double>(total_steps);
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.step > 0 && static_cast<double>(r.step) >= cutoff) {
      sum += r.*field;
      ++n;
    }
  }
  if (n == 0)
    throw std::invalid_argument("final_window_mean: no records in window");
  return sum / n;
}

std::vector<std::string> sweep(const HyperConfig& base, const std::string& key,
                               const std::vector<std::string>& values,
                               const std::string& out_dir) {
  if (values.empty()) throw std::invalid_argument("sweep: no values");
  std::filesystem::create_directories(out_dir);

  struct RunStats {
    std::string label;
    double reward, cost, rate;
  };
  std::vector<RunStats> stats;
  std::vector<std::string> paths;
  for (const auto& value : values) {
    HyperConfig cfg = base;
    apply_key_value(cfg, key, value);  // rejects unknown keys
    validate(cfg);
    std::string tag = value;
    std::replace(tag.begin(), tag.end(), '.', 'p');
    std::replace(tag.begin(), tag.end(), ',', '-');
    const std::string path = out_dir + "/" + to_string(cfg.algorithm) + "_" +
                             key + "_" + tag + ".csv";
    const auto records = run_experiment(cfg, path);
    paths.push_back(path);
    stats.push_back(
        {key + "=" + value,
         final_window_mean(records, &MetricsRecord::eval_ep_reward,
                           cfg.total_steps),
         final_window_mean(records, &MetricsRecord::eval_ep_cost,
                           cfg.total_steps),
         final_window_mean(records, &MetricsRecord::train_cost_rate,
                           cfg.total_steps)});
  }

  auto ci = [&](auto pick) {
    double mean = 0.0;
    for (const auto& s : stats) mean += pick(s);
    mean /= stats.size();
    double var = 0.0;
    for (const auto& s : stats) var += (pick(s) - mean) * (pick(s) - mean);
    var = stats.size() > 1 ? var / (stats.size() - 1) : 0.0;
    const double half = 1.96 * std::sqrt(var / stats.size());
    return std::pair<double, double>(mean, half);
  };

  std::ofstream summary(out_dir + "/summary.txt");
  summary << "sweep over " << key << " (algorithm "
          << to_string(base.algorithm) << ", final-window means)\n";
  for (const auto& s : stats)
    summary << "  " << s.label << ": ep_reward " << s.reward << "  ep_cost "
            << s.cost << "  cost_rate " << s.rate << "\n";
  const auto [mr, hr] = ci([](const RunStats& s) { return s.reward; });
  const auto [mc, hc] = ci([](const RunStats& s) { return s.cost; });
  const auto [mt, ht] = ci([](const RunStats& s) { return s.rate; });
  summary << "across runs (95% CI): ep_reward " << mr << " +- " << hr
          << "  ep_cost " << mc << " +- " << hc << "  cost_rate " << mt
          << " +- " << ht << "\n";
  return paths;
}

}  // namespace saferl
