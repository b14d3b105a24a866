#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <vector>

namespace saferl {

// One environment step. a_task/a_risk duplicate a_exec except under
// Recovery RL, where the proposed and executed actions can differ. c_prev is
// the cost observed at the preceding step (0 at episode start); the safety
// layer's linear model regresses against it.
struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a_exec;
  Eigen::VectorXd s_next;
  double r = 0.0;
  int c = 0;
  int d = 0;
  Eigen::VectorXd a_task;
  Eigen::VectorXd a_risk;
  int c_prev = 0;
};

// Column-per-field view of a sampled mini-batch, one row per transition.
struct Batch {
  Eigen::MatrixXd s;
  Eigen::MatrixXd a_exec;
  Eigen::MatrixXd s_next;
  Eigen::VectorXd r;
  Eigen::VectorXd c;
  Eigen::VectorXd d;
  Eigen::MatrixXd a_task;
  Eigen::MatrixXd a_risk;
  Eigen::VectorXd c_prev;

  int size() const { return static_cast<int>(s.rows()); }
};

// Fixed-capacity ring buffer with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  // Appends, overwriting the oldest entry when full. Rejects malformed
  // transitions (non-finite values, c or d outside {0,1}) with
  // std::invalid_argument.
  void push(const Transition& t);

  Batch sample(int n, std::mt19937_64& rng) const;

  const Transition& at(std::size_t i) const;  // i = 0 is the oldest entry

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write position once full
  std::vector<Transition> data_;
};

}  // namespace saferl
