#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace saferl {

// Constants of the kinematic speed-limited driving task.
struct EnvConfig {
  double dt = 0.05;            // s
  double a_max = 2.0;          // m/s^2 at full throttle
  double v_max = 3.0;          // m/s
  double wheelbase = 0.3;      // m
  double max_steer = 0.5;      // rad
  double speed_limit = 1.5;    // m/s, cost fires strictly above this
  double lateral_penalty = 0.1;
  double reset_y_range = 0.1;  // initial lateral offset drawn from +-range
  int horizon = 500;
};

struct EnvState {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double psi = 0.0;
  int step_index = 0;
};

struct StepResult {
  Eigen::Vector4d next_obs;
  double reward = 0.0;
  int cost = 0;
  bool done = false;
};

// Pure one-step transition of the kinematic bicycle model.
std::pair<EnvState, StepResult> kinematic_step(const EnvState& state,
                                               const Eigen::Vector2d& action,
                                               const EnvConfig& cfg);

// Kinematic bicycle car on an infinite straight avenue. Reward is forward
// progress minus a small lateral penalty; cost is the binary speeding
// indicator. Episodes end only at the time limit.
class SpeedLimitEnv {
 public:
  explicit SpeedLimitEnv(EnvConfig cfg = {}) : cfg_(cfg) {}

  static constexpr int kObsDim = 4;  // [y, v, sin psi, cos psi]
  static constexpr int kActDim = 2;  // [throttle, steering] in [-1, 1]

  Eigen::Vector4d reset(std::uint64_t seed);

  // Action components outside [-1, 1] are clipped. Throws on non-finite
  // actions.
  StepResult step(const Eigen::Vector2d& action);

  int horizon() const { return cfg_.horizon; }
  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }

  static Eigen::Vector4d observe(const EnvState& s);

 private:
  EnvConfig cfg_;
  EnvState state_;
  std::mt19937_64 rng_;
};

}  // namespace saferl
