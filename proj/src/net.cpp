#include "saferl/net.hpp"

#include <cmath>
#include <stdexcept>

namespace saferl {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

Eigen::MatrixXd apply_head(Head head, const Eigen::MatrixXd& pre) {
  switch (head) {
    case Head::Identity:
      return pre;
    case Head::Tanh:
      return pre.array().tanh();
    case Head::Softplus:
      // log1p(exp(x)) with the large-x branch to avoid overflow.
      return pre.unaryExpr([](double x) { return softplus(x); });
    case Head::Sigmoid:
      return pre.unaryExpr(
          [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  }
  throw std::logic_error("unknown head");
}

// d(head)/d(pre), expressed from pre and post activation values.
Eigen::ArrayXXd head_derivative(Head head, const Eigen::MatrixXd& pre,
                                const Eigen::MatrixXd& post) {
  switch (head) {
    case Head::Identity:
      return Eigen::ArrayXXd::Ones(pre.rows(), pre.cols());
    case Head::Tanh:
      return 1.0 - post.array().square();
    case Head::Softplus:
      return pre.unaryExpr([](double x) {
        return 1.0 / (1.0 + std::exp(-x));
      }).array();
    case Head::Sigmoid:
      return post.array() * (1.0 - post.array());
  }
  throw std::logic_error("unknown head");
}

}  // namespace

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

bool Gradient::all_finite() const {
  for (const auto& m : w)
    if (!m.allFinite()) return false;
  for (const auto& v : b)
    if (!v.allFinite()) return false;
  return true;
}

Mlp Mlp::make(const std::vector<int>& layer_sizes, Head head,
              std::mt19937_64& rng) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("Mlp needs at least input and output sizes");
  Mlp net;
  net.head = head;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    if (fan_in < 1 || fan_out < 1)
      throw std::invalid_argument("layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) w(i, j) = dist(rng);
    Eigen::RowVectorXd b(fan_out);
    for (int j = 0; j < fan_out; ++j) b(j) = dist(rng);
    net.w.push_back(std::move(w));
    net.b.push_back(std::move(b));
    net.adam_mw.emplace_back(Eigen::MatrixXd::Zero(fan_in, fan_out));
    net.adam_vw.emplace_back(Eigen::MatrixXd::Zero(fan_in, fan_out));
    net.adam_mb.emplace_back(Eigen::RowVectorXd::Zero(fan_out));
    net.adam_vb.emplace_back(Eigen::RowVectorXd::Zero(fan_out));
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        ForwardCache* cache) {
  if (input.cols() != net.input_dim())
    throw std::invalid_argument("forward: input width mismatch");
  const std::size_t layers = net.num_layers();
  if (cache) {
    cache->pre.resize(layers);
    cache->act.resize(layers + 1);
    cache->act[0] = input;
  }
  Eigen::MatrixXd x = input;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd pre = (x * net.w[l]).rowwise() + net.b[l];
    Eigen::MatrixXd post;
    if (l + 1 < layers) {
      post = pre.cwiseMax(0.0);  // ReLU, subgradient 0 at the kink
    } else {
      post = apply_head(net.head, pre);
    }
    if (cache) {
      cache->pre[l] = std::move(pre);
      cache->act[l + 1] = post;
    }
    x = std::move(post);
  }
  return x;
}

Eigen::VectorXd forward1(const Mlp& net, const Eigen::VectorXd& input) {
  return forward(net, input.transpose()).transpose();
}

Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& upstream, Gradient* grad) {
  const std::size_t layers = net.num_layers();
  if (cache.pre.size() != layers || cache.act.size() != layers + 1)
    throw std::invalid_argument("backward: stale forward cache");
  if (upstream.cols() != net.output_dim() ||
      upstream.rows() != cache.act[0].rows())
    throw std::invalid_argument("backward: upstream shape mismatch");
  if (!upstream.allFinite())
    throw std::invalid_argument("backward: non-finite upstream gradient");

  if (grad) {
    grad->w.resize(layers);
    grad->b.resize(layers);
  }

  Eigen::MatrixXd delta =
      upstream.array() *
      head_derivative(net.head, cache.pre[layers - 1], cache.act[layers]);
  for (std::size_t li = layers; li-- > 0;) {
    if (grad) {
      grad->w[li].noalias() = cache.act[li].transpose() * delta;
      grad->b[li] = delta.colwise().sum();
    }
    Eigen::MatrixXd dprev = delta * net.w[li].transpose();
    if (li == 0) return dprev;
    delta = dprev.array() * (cache.pre[li - 1].array() > 0.0).cast<double>();
  }
  return {};  // unreachable
}

void adam_step(Mlp& net, const Gradient& grad, double lr) {
  if (grad.w.size() != net.num_layers() || grad.b.size() != net.num_layers())
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  if (!grad.all_finite())
    throw std::runtime_error("adam_step: non-finite gradient, update refused");
  net.adam_t += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(net.adam_t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(net.adam_t));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    if (grad.w[l].rows() != net.w[l].rows() ||
        grad.w[l].cols() != net.w[l].cols() ||
        grad.b[l].cols() != net.b[l].cols())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    net.adam_mw[l] = kBeta1 * net.adam_mw[l] + (1.0 - kBeta1) * grad.w[l];
    net.adam_vw[l] =
        kBeta2 * net.adam_vw[l].array() +
        (1.0 - kBeta2) * grad.w[l].array().square();
    net.adam_mb[l] = kBeta1 * net.adam_mb[l] + (1.0 - kBeta1) * grad.b[l];
    net.adam_vb[l] =
        kBeta2 * net.adam_vb[l].array() +
        (1.0 - kBeta2) * grad.b[l].array().square();
    net.w[l].array() -= lr * (net.adam_mw[l].array() / bc1) /
                        ((net.adam_vw[l].array() / bc2).sqrt() + kAdamEps);
    net.b[l].array() -= lr * (net.adam_mb[l].array() / bc1) /
                        ((net.adam_vb[l].array() / bc2).sqrt() + kAdamEps);
  }
}

void sgd_step(Mlp& net, const Gradient& grad, double lr) {
  if (grad.w.size() != net.num_layers())
    throw std::invalid_argument("sgd_step: gradient layer count mismatch");
  if (!grad.all_finite())
    throw std::runtime_error("sgd_step: non-finite gradient, update refused");
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    net.w[l] -= lr * grad.w[l];
    net.b[l] -= lr * grad.b[l];
  }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("soft_update: tau out of (0, 1]");
  if (target.num_layers() != online.num_layers())
    throw std::invalid_argument("soft_update: layer count mismatch");
  for (std::size_t l = 0; l < target.num_layers(); ++l) {
    if (target.w[l].rows() != online.w[l].rows() ||
        target.w[l].cols() != online.w[l].cols())
      throw std::invalid_argument("soft_update: shape mismatch");
    target.w[l] = (1.0 - tau) * target.w[l] + tau * online.w[l];
    target.b[l] = (1.0 - tau) * target.b[l] + tau * online.b[l];
  }
}

}  // namespace saferl
