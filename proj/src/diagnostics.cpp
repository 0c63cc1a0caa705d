#include "cosmic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cosmic {

SufficiencyReport covariance_sufficiency(const TrajectoryDataset& dataset,
                                         std::optional<double> tol, bool keep_per_trajectory) {
  const int n = dataset.p() + dataset.q();
  SufficiencyReport r;
  r.sigma = Matrix::Zero(n, n);
  for (int l = 0; l < dataset.L(); ++l) {
    Matrix s = Matrix::Zero(n, n);
    for (int k = 0; k < dataset.N(); ++k) {
      const Vector z = dataset.regressor(l, k);
      s.noalias() += z * z.transpose();
    }
    s /= static_cast<double>(dataset.N());
    r.sigma += s;
    if (keep_per_trajectory) r.per_trajectory_sigmas.push_back(std::move(s));
  }

  r.tolerance = tol.value_or(1e-10 * r.sigma.trace() / n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r.sigma, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  r.min_eigenvalue = ev.minCoeff();
  r.rank = static_cast<int>((ev.array() > r.tolerance).count());
  r.sufficient = r.min_eigenvalue > r.tolerance;
  return r;
}

RankReport rank_condition(const TrajectoryDataset& dataset, std::optional<double> tol) {
  const int n = dataset.p() + dataset.q();
  const auto rows = static_cast<Eigen::Index>(dataset.N()) * dataset.L();
  Matrix Z(rows, n);
  Eigen::Index row = 0;
  for (int l = 0; l < dataset.L(); ++l) {
    for (int k = 0; k < dataset.N(); ++k) Z.row(row++) = dataset.regressor(l, k).transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(Z);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv.maxCoeff() : 0.0;
  const double floor =
      tol.value_or(static_cast<double>(std::max<Eigen::Index>(rows, n)) *
                   std::numeric_limits<double>::epsilon() * smax);
  RankReport r;
  r.rank = static_cast<int>((sv.array() > floor).count());
  r.satisfied = r.rank == n;
  return r;
}

OperationCount theorem3_count(std::int64_t N, std::int64_t p, std::int64_t q) {
  const std::int64_t n = p + q;
  OperationCount c;
  c.forward = N * (n * n * n + (p + 2) * n * n);
  c.backward = N * ((p + 1) * n * n);
  c.total = N * (n * n * n + (2 * p + 3) * n * n);
  return c;
}

double estimation_error(const LtvModel& estimated, const LtvModel& truth) {
  if (estimated.p() != truth.p() || estimated.q() != truth.q() || estimated.N() != truth.N()) {
    throw DimensionError("estimated and true models differ in shape");
  }
  double s = 0.0;
  for (int k = 0; k < truth.N(); ++k) s += (estimated.C(k) - truth.C(k)).squaredNorm();
  return std::sqrt(s);
}

std::vector<double> prediction_error(const LtvModel& model, const Trajectory& trajectory,
                                     PredictionMode mode) {
  const int N = model.N();
  if (static_cast<int>(trajectory.states.size()) != N + 1 ||
      static_cast<int>(trajectory.inputs.size()) != N) {
    throw DimensionError("trajectory length does not match the model horizon");
  }
  for (const auto& x : trajectory.states) {
    if (x.size() != model.p()) throw DimensionError("trajectory state dimension mismatch");
  }
  for (const auto& u : trajectory.inputs) {
    if (u.size() != model.q()) throw DimensionError("trajectory input dimension mismatch");
  }

  std::vector<double> err(N);
  Vector estimate = trajectory.states[0];
  for (int k = 0; k < N; ++k) {
    const Vector& from = mode == PredictionMode::OneStep ? trajectory.states[k] : estimate;
    Vector next = model.A(k) * from + model.B(k) * trajectory.inputs[k];
    estimate = std::move(next);
    err[k] = (estimate - trajectory.states[k + 1]).norm();
  }
  return err;
}

}  // namespace cosmic
