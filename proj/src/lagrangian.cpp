#include "saferl/lagrangian.hpp"

#include <algorithm>

namespace saferl {

ScalarMultiplier multiplier_update(const ScalarMultiplier& m,
                                   double batch_mean_qc) {
  ScalarMultiplier out = m;
  out.lambda = std::max(0.0, m.lambda + m.lr * (batch_mean_qc - m.eps));
  return out;
}

double lagrangian_actor_loss(AgentCore& core, const ScalarMultiplier& m,
                             const Batch& batch) {
  const double lambda = m.lambda;
  const ActorStepResult r = update_actor_weighted(
      core, batch.s, [lambda](const Eigen::VectorXd& qc) {
        return Eigen::VectorXd::Constant(qc.size(), lambda).eval();
      });
  return -r.mean_q1 + lambda * r.qc_values.mean();
}

}  // namespace saferl
