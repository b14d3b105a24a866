#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace saferl {

// Output-layer activation. Hidden layers are always ReLU.
enum class Head { Identity, Tanh, Softplus, Sigmoid };

struct Gradient {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::RowVectorXd> b;

  bool all_finite() const;
};

// Dense MLP with per-parameter Adam accumulators. Weights are stored
// (fan_in x fan_out) so a batch forward is act * w + b with one row per
// sample.
struct Mlp {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::RowVectorXd> b;
  Head head = Head::Identity;

  // Adam state, shape-congruent with w/b.
  std::vector<Eigen::MatrixXd> adam_mw, adam_vw;
  std::vector<Eigen::RowVectorXd> adam_mb, adam_vb;
  long adam_t = 0;

  int input_dim() const { return static_cast<int>(w.front().rows()); }
  int output_dim() const { return static_cast<int>(w.back().cols()); }
  std::size_t num_layers() const { return w.size(); }

  // Uniform +-1/sqrt(fan_in) init for every layer.
  static Mlp make(const std::vector<int>& layer_sizes, Head head,
                  std::mt19937_64& rng);
};

// Intermediate values kept for the backward pass. act[0] is the input,
// act[l+1] the post-activation output of layer l, pre[l] its pre-activation.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> act;
};

// Batch forward; input has one row per sample. Throws std::invalid_argument
// on width mismatch.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        ForwardCache* cache = nullptr);

// Single-sample convenience wrapper.
Eigen::VectorXd forward1(const Mlp& net, const Eigen::VectorXd& input);

// Reverse-mode pass for the scalar loss whose output gradient is `upstream`
// (one row per sample; summed over the batch). Fills `grad` with dLoss/dParam
// if non-null and returns dLoss/dInput.
Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& upstream,
                         Gradient* grad = nullptr);

// Standard Adam with beta1=0.9, beta2=0.999, eps=1e-8 and bias correction.
// Refuses non-finite gradients with std::runtime_error.
void adam_step(Mlp& net, const Gradient& grad, double lr);

// Plain SGD step params -= lr * grad (used by the multiplier network, whose
// update rule is literal gradient ascent).
void sgd_step(Mlp& net, const Gradient& grad, double lr);

// target = (1 - tau) * target + tau * online, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

double softplus(double x);
double relu(double x);

}  // namespace saferl
