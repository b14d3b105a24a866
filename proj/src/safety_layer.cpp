#include "saferl/safety_layer.hpp"

#include <stdexcept>

namespace saferl {

LinearCostModel LinearCostModel::make(int obs_dim, int act_dim,
                                      const std::vector<int>& hidden,
                                      double eps_inst, double lr,
                                      std::mt19937_64& rng) {
  if (eps_inst <= 0.0)
    throw std::invalid_argument("LinearCostModel: eps_inst must be > 0");
  LinearCostModel m;
  std::vector<int> layer_sizes;
  layer_sizes.push_back(obs_dim);
  layer_sizes.insert(layer_sizes.end(), hidden.begin(), hidden.end());
  layer_sizes.push_back(act_dim);
  m.g_net = Mlp::make(layer_sizes, Head::Identity, rng);
  m.eps_inst = eps_inst;
  m.lr = lr;
  return m;
}

double train_cost_model(LinearCostModel& model, const Batch& batch) {
  const int n = batch.size();
  ForwardCache cache;
  const Eigen::MatrixXd g = forward(model.g_net, batch.s, &cache);
  const Eigen::VectorXd pred =
      (g.array() * batch.a_exec.array()).rowwise().sum() +
      batch.c_prev.array();
  const Eigen::VectorXd err = pred - batch.c;
  const double loss = err.squaredNorm() / n;
  // d(loss)/d(g_i) = 2/n * err_i * a_i
  const Eigen::MatrixXd upstream =
      (batch.a_exec.array().colwise() * err.array()) * (2.0 / n);
  Gradient grad;
  backward(model.g_net, cache, upstream, &grad);
  adam_step(model.g_net, grad, model.lr);
  return loss;
}

Eigen::VectorXd project_action(LinearCostModel& model,
                               const Eigen::VectorXd& s,
                               const Eigen::VectorXd& a_raw, double c_prev) {
  const Eigen::VectorXd g = forward1(model.g_net, s);
  const double violation = g.dot(a_raw) + c_prev - model.eps_inst;
  if (violation <= 0.0) return a_raw;
  const double gg = g.squaredNorm();
  if (gg < 1e-8) {
    model.degenerate_count += 1;
    return a_raw;
  }
  Eigen::VectorXd corrected = a_raw - (violation / gg) * g;
  Eigen::VectorXd clipped = corrected.cwiseMax(-1.0).cwiseMin(1.0);
  if ((clipped - corrected).cwiseAbs().maxCoeff() > 0.0) model.clip_count += 1;
  return clipped;
}

bool projection_active(long step, long total_steps, double warmup_ratio) {
  return static_cast<double>(step) >=
         warmup_ratio * static_cast<double>(total_steps);
}

Eigen::VectorXd safety_layer_act(LinearCostModel& model, const AgentCore& core,
                                 const Eigen::VectorXd& s, double c_prev,
                                 long step, long total_steps,
                                 double warmup_ratio, bool explore,
                                 std::mt19937_64& rng) {
  Eigen::VectorXd a = select_action(core, s, explore, rng);
  if (!projection_active(step, total_steps, warmup_ratio)) return a;
  return project_action(model, s, a, c_prev);
}

}  // namespace saferl
