#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "saferl/agent.hpp"
#include "saferl/net.hpp"
#include "saferl/replay.hpp"

namespace saferl {

// Learned linear single-step cost model C(s, a) ~ g(s)' a + c_prev, trained
// online alongside the policy, plus the closed-form feasibility projection.
struct LinearCostModel {
  Mlp g_net;  // maps s to the action-width coefficient vector g(s)
  double eps_inst = 0.02;
  double lr = 3e-4;

  // Diagnostics.
  long degenerate_count = 0;  // projection skipped: ||g||^2 below tolerance
  long clip_count = 0;        // post-projection box clip changed the action

  static LinearCostModel make(int obs_dim, int act_dim,
                              const std::vector<int>& hidden, double eps_inst,
                              double lr, std::mt19937_64& rng);
};

// One Adam step on the MSE between g(s)' a + c_prev and the observed cost.
double train_cost_model(LinearCostModel& model, const Batch& batch);

// Returns a_raw when the predicted constraint g' a + c_prev <= eps holds;
// otherwise the minimal-norm correction a_raw - [(g'a + c_prev - eps)/g'g] g,
// clipped to the action box afterwards.
Eigen::VectorXd project_action(LinearCostModel& model,
                               const Eigen::VectorXd& s,
                               const Eigen::VectorXd& a_raw, double c_prev);

// Warm-up boundary is inclusive: the correction activates at
// step == warmup_ratio * total_steps.
bool projection_active(long step, long total_steps, double warmup_ratio);

// Backbone action (with exploration noise), projected once past warm-up.
Eigen::VectorXd safety_layer_act(LinearCostModel& model, const AgentCore& core,
                                 const Eigen::VectorXd& s, double c_prev,
                                 long step, long total_steps,
                                 double warmup_ratio, bool explore,
                                 std::mt19937_64& rng);

}  // namespace saferl
