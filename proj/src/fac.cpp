#include "saferl/fac.hpp"

namespace saferl {

MultiplierNet MultiplierNet::make(int obs_dim, const std::vector<int>& hidden,
                                  double lr, int delay, double eps,
                                  std::mt19937_64& rng) {
  if (delay < 1)
    throw std::invalid_argument("MultiplierNet: delay must be >= 1");
  MultiplierNet m;
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  m.net = Mlp::make(sizes, Head::Softplus, rng);
  m.net.b.back().setConstant(-5.0);
  m.lr = lr;
  m.delay = delay;
  m.eps = eps;
  return m;
}

Eigen::VectorXd multiplier_values(const MultiplierNet& mnet,
                                  const Eigen::MatrixXd& states) {
  return forward(mnet.net, states).col(0);
}

double fac_actor_loss(AgentCore& core, const MultiplierNet& mnet,
                      const Batch& batch) {
  const Eigen::VectorXd lam = multiplier_values(mnet, batch.s);
  const ActorStepResult r = update_actor_weighted(
      core, batch.s,
      [&lam](const Eigen::VectorXd&) { return lam; });
  return -r.mean_q1 + (lam.array() * r.qc_values.array()).mean();
}

std::optional<double> multiplier_net_update(MultiplierNet& mnet,
                                            const AgentCore& core,
                                            const Batch& batch,
                                            long update_counter) {
  if (update_counter % mnet.delay != 0) return std::nullopt;
  const int n = batch.size();
  const Eigen::VectorXd qc = policy_cost_values(core, batch.s);  // frozen

  ForwardCache cache;
  const Eigen::VectorXd lam = forward(mnet.net, batch.s, &cache).col(0);
  const double objective = (lam.array() * (qc.array() - mnet.eps)).mean();

  // Ascent on the objective = descent on its negation.
  const Eigen::MatrixXd upstream =
      (-(qc.array() - mnet.eps) / static_cast<double>(n)).matrix();
  Gradient grad;
  backward(mnet.net, cache, upstream, &grad);
  sgd_step(mnet.net, grad, mnet.lr);
  return objective;
}

}  // namespace saferl
