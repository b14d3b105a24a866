#include "saferl/replay.hpp"

#include <stdexcept>

namespace saferl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1)
    throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  const bool binary_c = t.c == 0 || t.c == 1;
  const bool binary_d = t.d == 0 || t.d == 1;
  const bool binary_cp = t.c_prev == 0 || t.c_prev == 1;
  if (!binary_c || !binary_d || !binary_cp || !t.s.allFinite() ||
      !t.a_exec.allFinite() || !t.s_next.allFinite() ||
      !t.a_task.allFinite() || !t.a_risk.allFinite() || !std::isfinite(t.r))
    throw std::invalid_argument("ReplayBuffer::push: malformed transition");
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[head_] = t;
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
  return data_[(head_ + i) % data_.size()];
}

Batch ReplayBuffer::sample(int n, std::mt19937_64& rng) const {
  if (data_.empty())
    throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  if (n < 1) throw std::invalid_argument("ReplayBuffer::sample: n must be >= 1");

  const int obs_dim = static_cast<int>(data_.front().s.size());
  const int act_dim = static_cast<int>(data_.front().a_exec.size());
  Batch b;
  b.s.resize(n, obs_dim);
  b.a_exec.resize(n, act_dim);
  b.s_next.resize(n, obs_dim);
  b.r.resize(n);
  b.c.resize(n);
  b.d.resize(n);
  b.a_task.resize(n, act_dim);
  b.a_risk.resize(n, act_dim);
  b.c_prev.resize(n);

  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  for (int i = 0; i < n; ++i) {
    const Transition& t = data_[pick(rng)];
    b.s.row(i) = t.s.transpose();
    b.a_exec.row(i) = t.a_exec.transpose();
    b.s_next.row(i) = t.s_next.transpose();
    b.r(i) = t.r;
    b.c(i) = t.c;
    b.d(i) = t.d;
    b.a_task.row(i) = t.a_task.transpose();
    b.a_risk.row(i) = t.a_risk.transpose();
    b.c_prev(i) = t.c_prev;
  }
  return b;
}

}  // namespace saferl
