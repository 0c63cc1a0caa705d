#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace cosmic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent shapes between datasets, models and schedules.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Schedules, configurations or weights outside their admissible range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// One recorded run: states x(0..N) and inputs u(0..N-1).
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
};

/**
 * L recorded trajectories of a system with p states and q inputs over N
 * transitions. Construction validates every shape, so a dataset that exists
 * is well formed.
 */
class TrajectoryDataset {
 public:
  TrajectoryDataset(int p, int q, int N, std::vector<Trajectory> trajectories);

  int p() const { return p_; }
  int q() const { return q_; }
  int N() const { return N_; }
  int L() const { return static_cast<int>(trajectories_.size()); }

  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  const Trajectory& trajectory(int l) const { return trajectories_.at(l); }

  /// Stacked regressor [x_l(k); u_l(k)] of length p+q.
  Vector regressor(int l, int k) const;

 private:
  int p_;
  int q_;
  int N_;
  std::vector<Trajectory> trajectories_;
};

/// Per-instant design matrices D(k) (L x (p+q)) and targets X'(k) (p x L).
struct StackedData {
  int p = 0;
  int q = 0;
  int N = 0;
  int L = 0;
  std::vector<Matrix> D;
  std::vector<Matrix> Xnext;

  int n() const { return p + q; }
};

StackedData assemble_stacked(const TrajectoryDataset& dataset);

/// Inverse of assemble_stacked.
TrajectoryDataset disassemble_stacked(const StackedData& data);

/**
 * Sequence of C(k) = [A(k)^T; B(k)^T], each (p+q) x p, for k = 0..N-1.
 */
class LtvModel {
 public:
  LtvModel(int p, int q, int N, std::vector<Matrix> C);

  /// All-zero model.
  static LtvModel zeros(int p, int q, int N);
  static LtvModel from_ab(const std::vector<Matrix>& A, const std::vector<Matrix>& B);

  int p() const { return p_; }
  int q() const { return q_; }
  int N() const { return N_; }

  const std::vector<Matrix>& C() const { return C_; }
  const Matrix& C(int k) const { return C_.at(k); }

  Matrix A(int k) const;
  Matrix B(int k) const;

  /// Frobenius norm of the stacked blocks.
  double norm() const;

 private:
  int p_;
  int q_;
  int N_;
  std::vector<Matrix> C_;
};

/**
 * Positive smoothing weights lambda_1..lambda_{N-1}.
 *
 * Zoned breakpoints are (start instant, value) pairs sorted by instant with
 * the first at instant 1; each value holds until the next breakpoint.
 */
class LambdaSchedule {
 public:
  struct Scalar {
    double value;
  };
  struct Zoned {
    std::vector<std::pair<int, double>> zones;
  };
  struct PerInstant {
    std::vector<double> values;
  };
  using Variant = std::variant<Scalar, Zoned, PerInstant>;

  static LambdaSchedule scalar(double value);
  static LambdaSchedule zoned(std::vector<std::pair<int, double>> zones);
  static LambdaSchedule per_instant(std::vector<double> values);

  const Variant& variant() const { return variant_; }

  /// Returns lambda_1..lambda_{N-1}; element i holds lambda_{i+1}.
  std::vector<double> materialize(int N) const;

  /// Same schedule with every weight multiplied by `factor` (> 0).
  LambdaSchedule scaled(double factor) const;

 private:
  explicit LambdaSchedule(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// The data-fit and smoothness parts of the objective.
struct CostTerms {
  double fit = 0.0;
  double smoothness = 0.0;
  double total() const { return fit + smoothness; }
};

CostTerms cost_terms(const LtvModel& model, const StackedData& data,
                     const LambdaSchedule& sched);

/// 1/2 sum_k |D(k)C(k) - X'(k)^T|_F^2 + 1/2 sum_k lambda_k |C(k) - C(k-1)|_F^2
double cost(const LtvModel& model, const StackedData& data, const LambdaSchedule& sched);

/// Per-instant gradient blocks of `cost` with respect to C(k).
std::vector<Matrix> gradient(const LtvModel& model, const StackedData& data,
                             const LambdaSchedule& sched);

/// Frobenius norm over a sequence of blocks.
double frobenius(const std::vector<Matrix>& blocks);

namespace detail {
void check_model_data(const LtvModel& model, const StackedData& data);
/// lambda padded to length N+1 with zeros at both ends: out[k] = lambda_k.
std::vector<double> padded_lambdas(const LambdaSchedule& sched, int N);
}  // namespace detail

}  // namespace cosmic
