#pragma once

#include "saferl/agent.hpp"

namespace saferl {

// Scalar Lagrange multiplier with projected gradient ascent on the dual.
struct ScalarMultiplier {
  double lambda = 0.0;
  double lr = 1e-5;
  double eps = 0.1;  // threshold on the discounted cost Q-value
};

// lambda' = max(0, lambda + lr * (batch_mean_qc - eps)).
ScalarMultiplier multiplier_update(const ScalarMultiplier& m,
                                   double batch_mean_qc);

// One Adam step on mean(-Q1(s, pi(s)) + lambda * Qc(s, pi(s))); returns that
// loss value. The -lambda*eps term is theta-constant and excluded.
double lagrangian_actor_loss(AgentCore& core, const ScalarMultiplier& m,
                             const Batch& batch);

}  // namespace saferl
