#include "saferl/epo.hpp"

#include <cmath>
#include <stdexcept>

namespace saferl {

double epo_actor_loss(AgentCore& core, const PenaltyConfig& cfg,
                      const Batch& batch) {
  if (cfg.kappa < 0.0)
    throw std::invalid_argument("epo_actor_loss: kappa must be >= 0");
  const double kappa = cfg.kappa;
  const double delta = cfg.delta;
  const ActorStepResult r = update_actor_weighted(
      core, batch.s, [kappa, delta](const Eigen::VectorXd& qc) {
        // Subgradient of kappa * [qc - delta]^+, taken as 0 at the kink.
        return (kappa * (qc.array() > delta).cast<double>()).matrix().eval();
      });
  const double penalty =
      kappa * (r.qc_values.array() - delta).max(0.0).mean();
  return -r.mean_q1 + penalty;
}

PenaltyResult verify_exact_penalty(const SmoothFn& f,
                                   const std::vector<SmoothFn>& g,
                                   double kappa, const Eigen::VectorXd& x0,
                                   const PenaltyDescentOptions& opts) {
  auto penalized = [&](const Eigen::VectorXd& x) {
    double v = f.value(x);
    for (const auto& gi : g) v += kappa * std::max(0.0, gi.value(x));
    return v;
  };

  Eigen::VectorXd x = x0;
  Eigen::VectorXd best_x = x;
  double best_v = penalized(x);
  auto descend = [&](double step, long iterations) {
    for (long t = 0; t < iterations; ++t) {
      Eigen::VectorXd d = f.grad(x);
      for (const auto& gi : g)
        if (gi.value(x) > 0.0) d += kappa * gi.grad(x);
      x -= step * d;
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() > opts.box)
        throw std::runtime_error("verify_exact_penalty: iterate diverged");
      const double v = penalized(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    }
  };

  for (long t = 0; t < opts.iterations; ++t)
    descend(opts.step0 / (1.0 + opts.step_decay * t), 1);

  // The diminishing-step phase oscillates around the optimum with amplitude
  // proportional to its final step. Annealing from that step down to 1e-9
  // shrinks the band far below feas_tol.
  double step = opts.step0 / (1.0 + opts.step_decay * opts.iterations);
  for (; step > 1e-9; step *= 0.5) {
    x = best_x;
    descend(step, 200);
  }

  PenaltyResult res;
  res.x_min = best_x;
  res.feasible = true;
  for (const auto& gi : g)
    if (gi.value(best_x) > opts.feas_tol) res.feasible = false;
  return res;
}

SmoothFn ConvexQp::objective() const {
  const Eigen::MatrixXd a_ = a;
  const Eigen::VectorXd b_ = b;
  SmoothFn fn;
  fn.value = [a_, b_](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(a_ * x) + b_.dot(x);
  };
  fn.grad = [a_, b_](const Eigen::VectorXd& x) {
    return (a_ * x + b_).eval();
  };
  return fn;
}

SmoothFn ConvexQp::constraint() const {
  const Eigen::VectorXd g_ = g;
  const double h_ = h;
  SmoothFn fn;
  fn.value = [g_, h_](const Eigen::VectorXd& x) { return g_.dot(x) - h_; };
  fn.grad = [g_, h_](const Eigen::VectorXd& x) {
    (void)x;
    return g_;
  };
  return fn;
}

ConvexQp ConvexQp::random(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lam_pick(0.5, 2.5);
  for (;;) {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = 0.5 * u(rng);
    ConvexQp qp;
    qp.a = m.transpose() * m + Eigen::MatrixXd::Identity(dim, dim);
    qp.b.resize(dim);
    for (int i = 0; i < dim; ++i) qp.b(i) = 2.0 * u(rng);
    qp.g.resize(dim);
    for (int i = 0; i < dim; ++i) qp.g(i) = u(rng);
    if (qp.g.norm() < 0.3) continue;
    qp.g.normalize();

    const Eigen::LLT<Eigen::MatrixXd> llt(qp.a);
    const Eigen::VectorXd x_u = llt.solve(-qp.b);
    const double gag = qp.g.dot(llt.solve(qp.g));
    if (gag < 0.1) continue;

    // Pick lambda_star directly; the constraint offset follows from KKT.
    qp.lambda_star = lam_pick(rng);
    const double margin = qp.lambda_star * gag;  // g'x_u - h
    qp.h = qp.g.dot(x_u) - margin;
    qp.x_star = x_u - llt.solve(qp.g) * qp.lambda_star;
    if (qp.x_star.cwiseAbs().maxCoeff() > 8.0) continue;
    return qp;
  }
}

}  // namespace saferl
