#include "saferl/recovery.hpp"

#include <algorithm>
#include <stdexcept>

namespace saferl {

RecoveryPolicy RecoveryPolicy::make(int obs_dim, int act_dim,
                                    const std::vector<int>& hidden,
                                    double eps_risk, double warmup_ratio,
                                    double actor_lr, std::mt19937_64& rng) {
  if (eps_risk <= 0.0 || eps_risk >= 1.0)
    throw std::invalid_argument("RecoveryPolicy: eps_risk must be in (0, 1)");
  RecoveryPolicy rec;
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(act_dim);
  rec.risk_actor = Mlp::make(sizes, Head::Tanh, rng);
  rec.risk_actor_target = rec.risk_actor;
  rec.eps_risk = eps_risk;
  rec.warmup_ratio = warmup_ratio;
  rec.actor_lr = actor_lr;
  return rec;
}

ActionTriple select_with_recovery(const RecoveryPolicy& rec,
                                  const AgentCore& core,
                                  const Eigen::VectorXd& s, long step,
                                  long total_steps, bool explore,
                                  std::mt19937_64& rng) {
  ActionTriple t;
  t.a_task = select_action(core, s, explore, rng);

  Eigen::VectorXd a_risk = forward1(rec.risk_actor, s);
  if (explore && core.cfg.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, core.cfg.sigma);
    for (int i = 0; i < a_risk.size(); ++i) a_risk(i) += noise(rng);
  }
  t.a_risk = a_risk.cwiseMax(-1.0).cwiseMin(1.0);

  const bool warmup = static_cast<double>(step) <
                      rec.warmup_ratio * static_cast<double>(total_steps);
  if (!warmup && core.qrisk) {
    Eigen::VectorXd x(s.size() + t.a_task.size());
    x << s, t.a_task;
    const double risk = forward1(*core.qrisk, x)(0);
    t.takeover = risk > rec.eps_risk;
  }
  t.a_exec = t.takeover ? t.a_risk : t.a_task;
  return t;
}

double update_task_actor(AgentCore& core, const Batch& batch) {
  const ActorStepResult r = update_actor_weighted(core, batch.s, {});
  return -r.mean_q1;
}

double update_recovery_actor(RecoveryPolicy& rec, const AgentCore& core,
                             const Batch& batch, Gradient* grad_out) {
  if (!core.qrisk)
    throw std::logic_error("update_recovery_actor: core has no risk critic");
  const int n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  ForwardCache actor_cache;
  const Eigen::MatrixXd actions =
      forward(rec.risk_actor, batch.s, &actor_cache);
  ForwardCache q_cache;
  const Eigen::MatrixXd x = concat_sa(batch.s, actions);
  const Eigen::VectorXd qv = forward(*core.qrisk, x, &q_cache).col(0);

  // Descend mean Qrisk: upstream +1/n through the critic, actions only.
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(n, 1, inv_n);
  const Eigen::MatrixXd dx = backward(*core.qrisk, q_cache, upstream, nullptr);
  Gradient grad;
  backward(rec.risk_actor, actor_cache,
           dx.rightCols(static_cast<int>(actions.cols())), &grad);
  if (grad_out) *grad_out = grad;
  adam_step(rec.risk_actor, grad, rec.actor_lr);
  return qv.mean();
}

}  // namespace saferl
