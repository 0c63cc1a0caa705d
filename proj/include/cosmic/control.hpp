#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cosmic/core.hpp"
#include "cosmic/sim.hpp"

namespace cosmic {

class SingularInputCost : public Error {
 public:
  using Error::Error;
};

/**
 * Constant diagonal LQR weights. Position coordinates get q_x, the others
 * q_v; without a mask the first ceil(p/2) coordinates are positions.
 */
struct LqrWeights {
  double q_x = 1.0;
  double q_v = 0.1;
  double r = 1e-3;
  std::vector<bool> position_mask;
  std::optional<Matrix> terminal;  // defaults to Q

  void validate(int p) const;
  Matrix Q(int p) const;
  Matrix R(int q) const;
};

struct GainSchedule {
  std::vector<Matrix> K;  // q x p, k = 0..N-1
  std::vector<Matrix> P;  // p x p, k = 0..N
};

/// Finite-horizon Riccati recursion on the given model.
GainSchedule lqr_synthesize(const LtvModel& model, const LqrWeights& weights);

struct ClosedLoop {
  std::vector<Vector> states;  // N+1
  std::vector<Vector> inputs;  // N
  std::vector<double> tracking_errors;  // position deviation, k = 0..N
};

/**
 * Drives `plant` with u(k) = -K(k)(y(k) - ref(k)) + u_ref(k), where y(k) is the
 * state plus measurement noise of `noise.sigma`. Tracking errors are
 * x(k)[0] - ref(k)[0].
 */
ClosedLoop closed_loop_rollout(const LtvModel& plant, const GainSchedule& gains,
                               const std::vector<Vector>& reference, const Vector& x0,
                               const NoiseConfig& noise = {},
                               const std::vector<Vector>* input_reference = nullptr);

struct TrackingStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double sum_sq = 0.0;
};

TrackingStats tracking_stats(std::span<const double> errors);

}  // namespace cosmic
