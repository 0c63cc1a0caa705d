#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cosmic/core.hpp"

namespace cosmic {

/// A diagonal block of the forward recursion could not be factorized.
class SingularBlock : public Error {
 public:
  SingularBlock(int instant, const std::string& what);
  int instant() const { return instant_; }

 private:
  int instant_;
};

/// The dense normal-equations matrix is singular.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// The dense oracle was asked for a system larger than its limit.
class SizeGuard : public Error {
 public:
  using Error::Error;
};

/**
 * Block-tridiagonal normal equations of the identification problem.
 *
 * Diagonal blocks S_kk = D(k)^T D(k) + (lambda_k + lambda_{k+1}) I with the
 * absent weight dropped at both ends; off-diagonal blocks are -lambda_k I and
 * only the scalars are stored.
 */
struct TridiagonalSystem {
  int p = 0;
  int q = 0;
  int N = 0;
  std::vector<Matrix> diag;
  std::vector<double> lambda;  // lambda[k-1] couples instants k-1 and k
  std::vector<Matrix> theta;

  int n() const { return p + q; }
  double coupling(int k) const { return lambda[k - 1]; }

  /// Full N(p+q) x N(p+q) matrix; only sensible for small systems.
  Matrix dense() const;
};

TridiagonalSystem build_system(const StackedData& data, const LambdaSchedule& sched);

enum class Precondition { Off, On, Auto };

/**
 * How multiplications are charged.
 *
 * Measured: the factorization-based fast path, counting the scalar
 * multiplications its kernels actually perform.
 * Textbook: explicit inverses with inversion = n^3, scalar-times-matrix = n^2
 * and (n x n)(n x p) products = p n^2, applied uniformly to all N instants.
 */
enum class CountMode { Measured, Textbook };

struct CosmicOptions {
  Precondition precondition = Precondition::Off;
  CountMode count_mode = CountMode::Measured;
  /// Auto mode preconditions once any S_kk condition estimate exceeds this.
  double auto_condition_threshold = 1e10;
};

struct SolveReport {
  std::string solver;
  LtvModel model;
  double final_cost = 0.0;
  double gradient_norm = 0.0;
  std::int64_t multiply_count = 0;
  std::int64_t forward_multiplies = 0;
  std::int64_t backward_multiplies = 0;
  double elapsed = 0.0;  // seconds
  std::int64_t iterations = 0;
  bool preconditioned = false;
  bool converged = true;
};

SolveReport cosmic_solve(const StackedData& data, const LambdaSchedule& sched,
                         const CosmicOptions& opts = {});

SolveReport cosmic_solve_preconditioned(const StackedData& data, const LambdaSchedule& sched,
                                        const CosmicOptions& opts = {});

struct SbcdOptions {
  double epsilon = 1e-10;           // on the squared gradient norm
  std::int64_t max_iters = 1000000;  // full sweeps
  std::uint64_t seed = 0;
  /// Starting point; drawn uniformly from [-0.5, 0.5] when absent.
  std::optional<LtvModel> initial;
  /// Called after every block update with the instant and current iterate.
  std::function<void(int, const std::vector<Matrix>&)> on_update;
};

SolveReport sbcd_solve(const StackedData& data, const LambdaSchedule& sched,
                       const SbcdOptions& opts = {});

struct OracleOptions {
  int max_dimension = 4000;
};

/// Dense normal-equations solve; reference for the structured solvers.
SolveReport oracle_solve(const StackedData& data, const LambdaSchedule& sched,
                         const OracleOptions& opts = {});

}  // namespace cosmic
