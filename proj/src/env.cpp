#include "saferl/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace saferl {

Eigen::Vector4d SpeedLimitEnv::observe(const EnvState& s) {
  return {s.y, s.v, std::sin(s.psi), std::cos(s.psi)};
}

Eigen::Vector4d SpeedLimitEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::uniform_real_distribution<double> y0(-cfg_.reset_y_range,
                                            cfg_.reset_y_range);
  state_ = EnvState{};
  state_.y = y0(rng_);
  return observe(state_);
}

std::pair<EnvState, StepResult> kinematic_step(const EnvState& state,
                                               const Eigen::Vector2d& action,
                                               const EnvConfig& cfg) {
  if (!action.allFinite())
    throw std::invalid_argument("kinematic_step: non-finite action");

  const double throttle = std::clamp(action(0), -1.0, 1.0);
  const double steer_cmd = std::clamp(action(1), -1.0, 1.0);

  EnvState next = state;
  next.v =
      std::clamp(state.v + cfg.a_max * throttle * cfg.dt, 0.0, cfg.v_max);
  next.psi = state.psi + (state.v / cfg.wheelbase) *
                             std::tan(cfg.max_steer * steer_cmd) * cfg.dt;
  next.x = state.x + state.v * std::cos(state.psi) * cfg.dt;
  next.y = state.y + state.v * std::sin(state.psi) * cfg.dt;
  next.step_index = state.step_index + 1;

  StepResult res;
  res.reward = (next.x - state.x) - cfg.lateral_penalty * std::abs(next.y);
  res.cost = next.v > cfg.speed_limit ? 1 : 0;  // strict inequality
  res.done = next.step_index >= cfg.horizon;
  res.next_obs = SpeedLimitEnv::observe(next);
  return {next, res};
}

StepResult SpeedLimitEnv::step(const Eigen::Vector2d& action) {
  if (state_.step_index >= cfg_.horizon)
    throw std::logic_error("SpeedLimitEnv::step: episode already done");
  auto [next, res] = kinematic_step(state_, action, cfg_);
  state_ = next;
  return res;
}

}  // namespace saferl
