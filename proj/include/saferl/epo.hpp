#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "saferl/agent.hpp"

namespace saferl {

// Exact-penalty surrogate: one fixed factor kappa with a ReLU penalty on the
// cost critic replaces the primal-dual game.
struct PenaltyConfig {
  double kappa = 5.0;
  double delta = 0.1;
};

// Actor step on mean(-Q1(s, pi(s)) + kappa * max(0, Qc(s, pi(s)) - delta)),
// subgradient 0 at the kink; returns the loss value.
double epo_actor_loss(AgentCore& core, const PenaltyConfig& cfg,
                      const Batch& batch);

// --- Analytic exact-penalty verifier -------------------------------------

// Differentiable scalar function on R^d.
struct SmoothFn {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

struct PenaltyDescentOptions {
  long iterations = 200000;
  double step0 = 0.5;
  double step_decay = 0.01;  // step_t = step0 / (1 + step_decay * t)
  double box = 10.0;         // iterates leaving [-box, box]^d are an error
  double feas_tol = 1e-6;
};

struct PenaltyResult {
  Eigen::VectorXd x_min;
  bool feasible = false;
};

// Minimizes f(x) + kappa * sum_i max(0, g_i(x)) by subgradient descent with
// diminishing steps, tracking the best iterate. Throws std::runtime_error if
// an iterate leaves the box.
PenaltyResult verify_exact_penalty(const SmoothFn& f,
                                   const std::vector<SmoothFn>& g,
                                   double kappa, const Eigen::VectorXd& x0,
                                   const PenaltyDescentOptions& opts = {});

// Random strictly convex QP min 1/2 x'Ax + b'x s.t. g'x <= h with the
// constraint active at the unconstrained optimum; lambda_star and the
// constrained optimum come from the KKT system in closed form. Used by the
// exactness test family.
struct ConvexQp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd g;
  double h = 0.0;
  Eigen::VectorXd x_star;   // constrained optimum
  double lambda_star = 0.0;

  SmoothFn objective() const;
  SmoothFn constraint() const;

  static ConvexQp random(int dim, std::mt19937_64& rng);
};

}  // namespace saferl
