#pragma once

#include <optional>
#include <random>
#include <vector>

#include "saferl/agent.hpp"

namespace saferl {

// State-dependent multiplier network lambda(s; xi) with a Softplus head,
// updated by literal gradient ascent on E lambda(s)(Qc(s, pi(s)) - eps)
// every `delay` backbone updates.
struct MultiplierNet {
  Mlp net;
  double lr = 1e-5;
  int delay = 12;
  double eps = 0.1;

  // Final bias starts at -5 so initial lambda(s) = softplus(-5) ~ 0.0067.
  static MultiplierNet make(int obs_dim, const std::vector<int>& hidden,
                            double lr, int delay, double eps,
                            std::mt19937_64& rng);
};

Eigen::VectorXd multiplier_values(const MultiplierNet& mnet,
                                  const Eigen::MatrixXd& states);

// Actor step on mean(-Q1 + lambda(s) Qc) with lambda(s) held constant;
// returns the loss value.
double fac_actor_loss(AgentCore& core, const MultiplierNet& mnet,
                      const Batch& batch);

// Ascent step on mean lambda(s; xi)(Qc(s, pi(s)) - eps) with the critic and
// policy frozen. Skipped (nullopt) unless update_counter is divisible by
// the delay; otherwise returns the objective value before the step.
std::optional<double> multiplier_net_update(MultiplierNet& mnet,
                                            const AgentCore& core,
                                            const Batch& batch,
                                            long update_counter);

}  // namespace saferl
