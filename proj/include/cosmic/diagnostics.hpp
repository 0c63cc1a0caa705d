#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cosmic/core.hpp"

namespace cosmic {

struct SufficiencyReport {
  Matrix sigma;
  double min_eigenvalue = 0.0;
  double tolerance = 0.0;
  bool sufficient = false;
  int rank = 0;
  std::vector<Matrix> per_trajectory_sigmas;
};

/**
 * Empirical covariance test for a unique identification solution.
 *
 * Sigma_l = (1/N) sum_{k=0}^{N-1} [x;u][x;u]^T per trajectory, Sigma their sum.
 * The dataset is sufficient when Sigma - tol I is positive definite; `rank`
 * counts the eigenvalues above `tol`. Without an explicit tolerance
 * tol = 1e-10 trace(Sigma)/(p+q).
 */
SufficiencyReport covariance_sufficiency(const TrajectoryDataset& dataset,
                                         std::optional<double> tol = std::nullopt,
                                         bool keep_per_trajectory = false);

struct RankReport {
  bool satisfied = false;
  int rank = 0;
};

/// Numerical rank of all stacked [x_l(k)^T u_l(k)^T] rows.
RankReport rank_condition(const TrajectoryDataset& dataset,
                          std::optional<double> tol = std::nullopt);

struct OperationCount {
  std::int64_t total = 0;
  std::int64_t forward = 0;
  std::int64_t backward = 0;
};

/// N((p+q)^3 + (2p+3)(p+q)^2), split into its forward and backward parts.
OperationCount theorem3_count(std::int64_t N, std::int64_t p, std::int64_t q);

double estimation_error(const LtvModel& estimated, const LtvModel& truth);

enum class PredictionMode { OneStep, Rollout };

/// Per-step |x_hat(k+1) - x(k+1)|_2 for k = 0..N-1.
std::vector<double> prediction_error(const LtvModel& model, const Trajectory& trajectory,
                                     PredictionMode mode);

}  // namespace cosmic
