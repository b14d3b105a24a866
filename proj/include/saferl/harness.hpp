#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "saferl/agent.hpp"
#include "saferl/config.hpp"
#include "saferl/env.hpp"
#include "saferl/epo.hpp"
#include "saferl/fac.hpp"
#include "saferl/lagrangian.hpp"
#include "saferl/recovery.hpp"
#include "saferl/replay.hpp"
#include "saferl/safety_layer.hpp"

namespace saferl {

struct MetricsRecord {
  long step = 0;
  double eval_ep_reward = 0.0;
  double eval_ep_cost = 0.0;
  double train_cost_rate = 0.0;
  double wall_seconds = 0.0;
};

double cost_rate(long cum_cost, long cum_steps);

// Deterministic execution policy used by evaluation: maps (obs, c_prev) to
// the action the agent would apply with exploration off.
using EvalPolicy =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double c_prev)>;

// Mean undiscounted episode reward and episode cost over n fresh episodes.
std::pair<double, double> evaluate(const EvalPolicy& policy,
                                   const EnvConfig& env_cfg, int n_episodes,
                                   std::uint64_t seed);

// One training run. Owns the environment, the agent for cfg.algorithm, the
// replay buffer, and the five independent RNG streams derived from cfg.seed
// (init / env / exploration / sampling / target smoothing).
class Experiment {
 public:
  explicit Experiment(const HyperConfig& cfg);

  // One environment step followed by the update phase (cost critic, reward
  // critics, then the delayed actor) once past the random warm-start.
  void advance_one_step();

  // Evaluation snapshot at the current step; does not touch training RNG.
  MetricsRecord snapshot();

  // Full loop: a step-0 record, then one record every eval_interval steps.
  std::vector<MetricsRecord> run();

  EvalPolicy eval_policy();

  long step() const { return step_; }
  long cum_cost() const { return cum_cost_; }
  const AgentCore& core() const { return core_; }
  const HyperConfig& config() const { return cfg_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const std::optional<ScalarMultiplier>& multiplier() const { return lambda_; }

 private:
  ActionTriple pick_action();
  void update_phase();

  HyperConfig cfg_;
  SpeedLimitEnv env_;
  AgentCore core_;
  ReplayBuffer buffer_;
  std::optional<LinearCostModel> cost_model_;
  std::optional<RecoveryPolicy> recovery_;
  std::optional<ScalarMultiplier> lambda_;
  std::optional<MultiplierNet> mnet_;
  PenaltyConfig penalty_;

  std::mt19937_64 env_rng_, explore_rng_, sample_rng_, smooth_rng_;
  Eigen::VectorXd obs_;
  int c_prev_ = 0;
  long step_ = 0;
  long cum_cost_ = 0;
  std::chrono::steady_clock::time_point t0_;
};

// Runs a full experiment; writes the CSV when csv_path is non-empty.
std::vector<MetricsRecord> run_experiment(const HyperConfig& cfg,
                                          const std::string& csv_path = "");

std::string format_csv(const std::vector<MetricsRecord>& records);
void write_csv(const std::vector<MetricsRecord>& records,
               const std::string& path);
std::vector<MetricsRecord> read_csv(const std::string& path);

// Mean of a metric over the records in the closing fraction of the run
// (default: the last 10% of steps).
double final_window_mean(const std::vector<MetricsRecord>& records,
                         double MetricsRecord::*field, long total_steps,
                         double fraction = 0.1);

// Runs one experiment per value of `key`, emitting suffixed CSVs plus a
// plain-text summary of final-window means with 95% normal confidence
// intervals. Returns the CSV paths.
std::vector<std::string> sweep(const HyperConfig& base, const std::string& key,
                               const std::vector<std::string>& values,
                               const std::string& out_dir);

}  // namespace saferl
