#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "saferl/agent.hpp"

namespace saferl {

// Recovery policy paired with a task-policy AgentCore that carries the shared
// risk critic. The recovery actor minimizes predicted violation probability
// and takes over whenever Qrisk(s, a_task) exceeds eps_risk.
struct RecoveryPolicy {
  Mlp risk_actor, risk_actor_target;
  double eps_risk = 0.1;
  double warmup_ratio = 0.2;
  double actor_lr = 3e-4;

  static RecoveryPolicy make(int obs_dim, int act_dim,
                             const std::vector<int>& hidden, double eps_risk,
                             double warmup_ratio, double actor_lr,
                             std::mt19937_64& rng);
};

struct ActionTriple {
  Eigen::VectorXd a_exec;
  Eigen::VectorXd a_task;
  Eigen::VectorXd a_risk;
  bool takeover = false;
};

// Both candidate actions carry exploration noise (task first, then recovery,
// so the draw order is fixed). The threshold test always uses the task
// action; during warm-up Qrisk is ignored and the task action executes.
ActionTriple select_with_recovery(const RecoveryPolicy& rec,
                                  const AgentCore& core,
                                  const Eigen::VectorXd& s, long step,
                                  long total_steps, bool explore,
                                  std::mt19937_64& rng);

// Task actor: plain TD3 objective through Q1 (no target update here; the
// training loop polyaks everything after the delayed actor phase).
double update_task_actor(AgentCore& core, const Batch& batch);

// Recovery actor: one Adam step descending mean Qrisk(s, pi_risk(s)).
// grad_out, when given, receives the actor gradient of that objective.
double update_recovery_actor(RecoveryPolicy& rec, const AgentCore& core,
                             const Batch& batch, Gradient* grad_out = nullptr);

}  // namespace saferl
