#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "saferl/net.hpp"
#include "saferl/replay.hpp"

namespace saferl {

struct BackboneConfig {
  double gamma = 0.99;
  double gamma_c = 0.99;
  double sigma = 0.1;  // exploration noise std
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double safe_critic_lr = 3e-4;
  double smoothing_std = 0.2;  // target-policy smoothing (TD3)
  double smoothing_clip = 0.5;
  int policy_delay = 2;
};

// Deterministic actor-critic core: tanh actor, twin reward critics with
// targets, a single cost critic, and an optional sigmoid-headed risk critic.
// Critics take the concatenated (s, a) row as input.
struct AgentCore {
  Mlp actor, actor_target;
  Mlp q1, q2, q1_target, q2_target;
  Mlp qc, qc_target;
  std::optional<Mlp> qrisk, qrisk_target;
  BackboneConfig cfg;
  long update_count = 0;

  int obs_dim() const { return actor.input_dim(); }
  int act_dim() const { return actor.output_dim(); }

  static AgentCore make(int obs_dim, int act_dim,
                        const std::vector<int>& hidden,
                        const BackboneConfig& cfg, bool with_risk_critic,
                        std::mt19937_64& rng);
};

Eigen::MatrixXd concat_sa(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a);

// clip(pi(s) + eta, -1, 1), eta ~ N(0, sigma^2) only when exploring.
Eigen::VectorXd select_action(const AgentCore& core, const Eigen::VectorXd& s,
                              bool explore, std::mt19937_64& rng);

// TD3 targets: r + gamma (1-d) min(Q1', Q2')(s', smoothed target action).
// Smoothing noise is drawn from `rng`.
Eigen::VectorXd critic_target(const AgentCore& core, const Batch& batch,
                              std::mt19937_64& rng);

// One Adam step on each twin critic's MSE toward `targets`; returns the mean
// of the two losses.
double update_reward_critics(AgentCore& core, const Batch& batch,
                             const Eigen::VectorXd& targets);

// c + gamma_c (1-d) Qc'(s', pi'(s')); no smoothing, single critic.
Eigen::VectorXd cost_critic_target(const AgentCore& core, const Batch& batch);
double update_cost_critic(AgentCore& core, const Batch& batch);

// c + (1-c) gamma_c (1-d) Qrisk'(s', pi'(s')); the sigmoid head keeps
// predictions in [0, 1].
Eigen::VectorXd risk_critic_target(const AgentCore& core, const Batch& batch);
double update_risk_critic(AgentCore& core, const Batch& batch);

// One Adam step on the actor for the per-sample loss
//   -Q1(s, pi(s)) + w_i * Qc(s, pi(s)),
// averaged over the batch. The weights are produced by `weight_fn` from the
// cost-critic values of the current policy (EPO's penalty indicator needs
// them; Lagrangian and FAC ignore the argument). An empty weight_fn skips
// the cost-critic path entirely. Returns the Q values needed by callers to
// report their algorithm's loss.
struct ActorStepResult {
  double mean_q1 = 0.0;
  Eigen::VectorXd qc_values;  // empty when the cost path was skipped
};
using CostWeightFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& qc_values)>;
ActorStepResult update_actor_weighted(AgentCore& core,
                                      const Eigen::MatrixXd& states,
                                      const CostWeightFn& weight_fn,
                                      Gradient* grad_out = nullptr);

// Q values of the current policy at the batch states, without updating
// anything (used by multiplier updates).
Eigen::VectorXd policy_cost_values(const AgentCore& core,
                                   const Eigen::MatrixXd& states);

// Polyak-update every target network in the core.
void polyak_all(AgentCore& core);

// Plain TD3 actor objective -E Q1(s, pi(s)), plus target updates. Returns
// the loss.
double update_actor_unconstrained(AgentCore& core, const Batch& batch);

}  // namespace saferl
