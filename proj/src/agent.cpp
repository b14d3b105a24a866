#include "saferl/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace saferl {

namespace {

// MSE regression step toward `targets` for one critic on inputs X.
double critic_regression(Mlp& critic, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& targets, double lr) {
  ForwardCache cache;
  const Eigen::MatrixXd pred = forward(critic, x, &cache);
  const Eigen::VectorXd err = pred.col(0) - targets;
  const double n = static_cast<double>(err.size());
  const double loss = err.squaredNorm() / n;
  Eigen::MatrixXd upstream = (2.0 / n) * err;
  Gradient grad;
  backward(critic, cache, upstream, &grad);
  adam_step(critic, grad, lr);
  return loss;
}

}  // namespace

AgentCore AgentCore::make(int obs_dim, int act_dim,
                          const std::vector<int>& hidden,
                          const BackboneConfig& cfg, bool with_risk_critic,
                          std::mt19937_64& rng) {
  auto sizes = [&](int in, int out) {
    std::vector<int> s;
    s.push_back(in);
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
  };
  AgentCore core;
  core.cfg = cfg;
  core.actor = Mlp::make(sizes(obs_dim, act_dim), Head::Tanh, rng);
  core.q1 = Mlp::make(sizes(obs_dim + act_dim, 1), Head::Identity, rng);
  core.q2 = Mlp::make(sizes(obs_dim + act_dim, 1), Head::Identity, rng);
  core.qc = Mlp::make(sizes(obs_dim + act_dim, 1), Head::Identity, rng);
  if (with_risk_critic) {
    core.qrisk = Mlp::make(sizes(obs_dim + act_dim, 1), Head::Sigmoid, rng);
    core.qrisk_target = core.qrisk;
  }
  core.actor_target = core.actor;
  core.q1_target = core.q1;
  core.q2_target = core.q2;
  core.qc_target = core.qc;
  return core;
}

Eigen::MatrixXd concat_sa(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
  if (s.rows() != a.rows())
    throw std::invalid_argument("concat_sa: row count mismatch");
  Eigen::MatrixXd x(s.rows(), s.cols() + a.cols());
  x << s, a;
  return x;
}

Eigen::VectorXd select_action(const AgentCore& core, const Eigen::VectorXd& s,
                              bool explore, std::mt19937_64& rng) {
  Eigen::VectorXd a = forward1(core.actor, s);
  if (explore && core.cfg.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, core.cfg.sigma);
    for (int i = 0; i < a.size(); ++i) a(i) += noise(rng);
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::VectorXd critic_target(const AgentCore& core, const Batch& batch,
                              std::mt19937_64& rng) {
  Eigen::MatrixXd a_next = forward(core.actor_target, batch.s_next);
  if (core.cfg.smoothing_std > 0.0) {
    std::normal_distribution<double> noise(0.0, core.cfg.smoothing_std);
    const double clip = core.cfg.smoothing_clip;
    for (int i = 0; i < a_next.rows(); ++i)
      for (int j = 0; j < a_next.cols(); ++j)
        a_next(i, j) += std::clamp(noise(rng), -clip, clip);
  }
  a_next = a_next.cwiseMax(-1.0).cwiseMin(1.0);
  const Eigen::MatrixXd x = concat_sa(batch.s_next, a_next);
  const Eigen::VectorXd q1v = forward(core.q1_target, x).col(0);
  const Eigen::VectorXd q2v = forward(core.q2_target, x).col(0);
  Eigen::VectorXd y = batch.r.array() +
                      core.cfg.gamma * (1.0 - batch.d.array()) *
                          q1v.cwiseMin(q2v).array();
  if (!y.allFinite())
    throw std::runtime_error("critic_target: non-finite targets");
  return y;
}

double update_reward_critics(AgentCore& core, const Batch& batch,
                             const Eigen::VectorXd& targets) {
  const Eigen::MatrixXd x = concat_sa(batch.s, batch.a_exec);
  const double l1 = critic_regression(core.q1, x, targets, core.cfg.critic_lr);
  const double l2 = critic_regression(core.q2, x, targets, core.cfg.critic_lr);
  return 0.5 * (l1 + l2);
}

Eigen::VectorXd cost_critic_target(const AgentCore& core, const Batch& batch) {
  const Eigen::MatrixXd a_next = forward(core.actor_target, batch.s_next);
  const Eigen::MatrixXd x = concat_sa(batch.s_next, a_next);
  const Eigen::VectorXd qcv = forward(core.qc_target, x).col(0);
  return batch.c.array() +
         core.cfg.gamma_c * (1.0 - batch.d.array()) * qcv.array();
}

double update_cost_critic(AgentCore& core, const Batch& batch) {
  const Eigen::VectorXd y = cost_critic_target(core, batch);
  const Eigen::MatrixXd x = concat_sa(batch.s, batch.a_exec);
  const double loss =
      critic_regression(core.qc, x, y, core.cfg.safe_critic_lr);
  if (!std::isfinite(loss))
    throw std::runtime_error("update_cost_critic: non-finite loss");
  return loss;
}

Eigen::VectorXd risk_critic_target(const AgentCore& core, const Batch& batch) {
  if (!core.qrisk_target)
    throw std::logic_error("risk_critic_target: core has no risk critic");
  const Eigen::MatrixXd a_next = forward(core.actor_target, batch.s_next);
  const Eigen::MatrixXd x = concat_sa(batch.s_next, a_next);
  const Eigen::VectorXd qv = forward(*core.qrisk_target, x).col(0);
  // c = 1 pins the target at exactly 1; otherwise bootstrap, masked at the
  // time limit.
  return batch.c.array() +
         (1.0 - batch.c.array()) * core.cfg.gamma_c *
             (1.0 - batch.d.array()) * qv.array();
}

double update_risk_critic(AgentCore& core, const Batch& batch) {
  if (!core.qrisk)
    throw std::logic_error("update_risk_critic: core has no risk critic");
  const Eigen::VectorXd y = risk_critic_target(core, batch);
  const Eigen::MatrixXd x = concat_sa(batch.s, batch.a_exec);
  const double loss =
      critic_regression(*core.qrisk, x, y, core.cfg.safe_critic_lr);
  if (!std::isfinite(loss))
    throw std::runtime_error("update_risk_critic: non-finite loss");
  return loss;
}

Eigen::VectorXd policy_cost_values(const AgentCore& core,
                                   const Eigen::MatrixXd& states) {
  const Eigen::MatrixXd a = forward(core.actor, states);
  return forward(core.qc, concat_sa(states, a)).col(0);
}

ActorStepResult update_actor_weighted(AgentCore& core,
                                      const Eigen::MatrixXd& states,
                                      const CostWeightFn& weight_fn,
                                      Gradient* grad_out) {
  const int n = static_cast<int>(states.rows());
  const int act_dim = core.act_dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  ForwardCache actor_cache;
  const Eigen::MatrixXd actions = forward(core.actor, states, &actor_cache);
  const Eigen::MatrixXd x = concat_sa(states, actions);

  ForwardCache q1_cache;
  const Eigen::VectorXd q1v = forward(core.q1, x, &q1_cache).col(0);
  // d/da of mean(-Q1): upstream -1/n per sample, no parameter grads needed.
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(n, 1, -inv_n);
  Eigen::MatrixXd dx = backward(core.q1, q1_cache, upstream, nullptr);
  Eigen::MatrixXd da = dx.rightCols(act_dim);

  ActorStepResult res;
  res.mean_q1 = q1v.mean();

  if (weight_fn) {
    ForwardCache qc_cache;
    res.qc_values = forward(core.qc, x, &qc_cache).col(0);
    const Eigen::VectorXd w = weight_fn(res.qc_values);
    if (w.size() != n)
      throw std::invalid_argument(
          "update_actor_weighted: weight size mismatch");
    if ((w.array() != 0.0).any()) {
      Eigen::MatrixXd up_c = (w.array() * inv_n).matrix();
      Eigen::MatrixXd dxc = backward(core.qc, qc_cache, up_c, nullptr);
      da += dxc.rightCols(act_dim);
    }
  }

  Gradient grad;
  backward(core.actor, actor_cache, da, &grad);
  if (grad_out) *grad_out = grad;
  adam_step(core.actor, grad, core.cfg.actor_lr);
  return res;
}

void polyak_all(AgentCore& core) {
  const double tau = core.cfg.tau;
  soft_update(core.actor_target, core.actor, tau);
  soft_update(core.q1_target, core.q1, tau);
  soft_update(core.q2_target, core.q2, tau);
  soft_update(core.qc_target, core.qc, tau);
  if (core.qrisk) soft_update(*core.qrisk_target, *core.qrisk, tau);
}

double update_actor_unconstrained(AgentCore& core, const Batch& batch) {
  const ActorStepResult r = update_actor_weighted(core, batch.s, {});
  polyak_all(core);
  return -r.mean_q1;
}

}  // namespace saferl
