#include "cosmic/control.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace cosmic {

void LqrWeights::validate(int p) const {
  if (!(q_x > 0.0)) throw InvalidArgument("q_x must be positive");
  if (!(q_v >= 0.0)) throw InvalidArgument("q_v must be non-negative");
  if (!(r > 0.0)) throw InvalidArgument("r must be positive");
  if (!position_mask.empty() && static_cast<int>(position_mask.size()) != p) {
    throw DimensionError("position mask length must equal the state dimension");
  }
  if (terminal && (terminal->rows() != p || terminal->cols() != p)) {
    throw DimensionError("terminal cost must be p x p");
  }
}

Matrix LqrWeights::Q(int p) const {
  Vector d(p);
  const int positions = (p + 1) / 2;
  for (int i = 0; i < p; ++i) {
    const bool is_position = position_mask.empty() ? i < positions : position_mask[i];
    d(i) = is_position ? q_x : q_v;
  }
  return d.asDiagonal();
}

Matrix LqrWeights::R(int q) const { return r * Matrix::Identity(q, q); }

GainSchedule lqr_synthesize(const LtvModel& model, const LqrWeights& weights) {
  const int p = model.p();
  const int q = model.q();
  const int N = model.N();
  weights.validate(p);
  const Matrix Q = weights.Q(p);
  const Matrix R = weights.R(q);

  GainSchedule g;
  g.K.resize(N);
  g.P.resize(N + 1);
  g.P[N] = weights.terminal.value_or(Q);
  for (int k = N - 1; k >= 0; --k) {
    const Matrix A = model.A(k);
    const Matrix B = model.B(k);
    const Matrix& Pn = g.P[k + 1];
    const Matrix BtP = B.transpose() * Pn;
    const Matrix H = R + BtP * B;
    if (q > 0) {
      Eigen::LDLT<Matrix> ldlt(H);
      if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > std::numeric_limits<double>::epsilon())) {
        throw SingularInputCost("R + B^T P B is singular at instant " + std::to_string(k));
      }
      g.K[k] = ldlt.solve(BtP * A);
    } else {
      g.K[k] = Matrix::Zero(0, p);
    }
    Matrix P = Q + A.transpose() * Pn * (A - B * g.K[k]);
    g.P[k] = 0.5 * (P + P.transpose());
  }
  return g;
}

ClosedLoop closed_loop_rollout(const LtvModel& plant, const GainSchedule& gains,
                               const std::vector<Vector>& reference, const Vector& x0,
                               const NoiseConfig& noise,
                               const std::vector<Vector>* input_reference) {
  const int N = plant.N();
  const int p = plant.p();
  const int q = plant.q();
  if (static_cast<int>(gains.K.size()) != N) throw DimensionError("gain schedule length mismatch");
  if (static_cast<int>(reference.size()) != N + 1) {
    throw DimensionError("reference must hold N+1 states");
  }
  if (x0.size() != p) throw DimensionError("initial state dimension mismatch");
  if (input_reference && static_cast<int>(input_reference->size()) != N) {
    throw DimensionError("input reference must hold N inputs");
  }

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ClosedLoop out;
  out.states.reserve(N + 1);
  out.inputs.reserve(N);
  out.states.push_back(x0);
  for (int k = 0; k < N; ++k) {
    if (gains.K[k].rows() != q || gains.K[k].cols() != p) {
      throw DimensionError("gain shape mismatch at instant " + std::to_string(k));
    }
    if (reference[k].size() != p) throw DimensionError("reference dimension mismatch");
    Vector measured = out.states[k];
    if (noise.sigma > 0.0) {
      for (int i = 0; i < p; ++i) measured(i) += noise.sigma * normal(rng);
    }
    Vector u = -gains.K[k] * (measured - reference[k]);
    if (input_reference) u += (*input_reference)[k];
    out.states.push_back(plant.A(k) * out.states[k] + plant.B(k) * u);
    out.inputs.push_back(std::move(u));
  }
  if (reference[N].size() != p) throw DimensionError("reference dimension mismatch");
  out.tracking_errors.reserve(N + 1);
  for (int k = 0; k <= N; ++k) out.tracking_errors.push_back(out.states[k](0) - reference[k](0));
  return out;
}

TrackingStats tracking_stats(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("tracking statistics need at least one error");
  TrackingStats s;
  for (double e : errors) {
    s.mean += e;
    s.sum_sq += e * e;
  }
  const auto n = static_cast<double>(errors.size());
  s.mean /= n;
  double var = 0.0;
  for (double e : errors) var += (e - s.mean) * (e - s.mean);
  s.stddev = std::sqrt(var / n);
  return s;
}

}  // namespace cosmic
