#include "cosmic/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace cosmic {

SingularBlock::SingularBlock(int instant, const std::string& what)
    : Error(what), instant_(instant) {}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Multiplication tallies for the kernels used below. Divisions count as
// multiplications; square roots are not counted.
std::int64_t llt_factor_cost(std::int64_t n) {
  std::int64_t c = 0;
  for (std::int64_t j = 0; j < n; ++j) c += j + (n - 1 - j) * (j + 1);
  return c;
}

std::int64_t llt_solve_cost(std::int64_t n, std::int64_t rhs_cols) {
  return rhs_cols * n * (n + 1);
}

std::int64_t lu_factor_cost(std::int64_t n) {
  std::int64_t c = 0;
  for (std::int64_t j = 0; j < n; ++j) c += (n - 1 - j) + (n - 1 - j) * (n - 1 - j);
  return c;
}

std::int64_t lu_solve_cost(std::int64_t n, std::int64_t rhs_cols) {
  return rhs_cols * n * n;
}

// The rcond estimate of PartialPivLU can miss an exactly zero pivot, so the
// pivot spread is checked as well.
bool lu_regular(const Eigen::PartialPivLU<Matrix>& lu) {
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (pivots.size() == 0) return true;
  const double rc = lu.rcond();
  return std::isfinite(rc) && rc > kEps && pivots.minCoeff() > kEps * pivots.maxCoeff();
}

// SPD factorization with an LU fallback for blocks that lose definiteness.
class BlockFactor {
 public:
  // Returns false when the block is numerically singular.
  bool compute(const Matrix& m, std::int64_t& count) {
    const auto n = m.rows();
    Eigen::LLT<Matrix> llt(m);
    count += llt_factor_cost(n);
    if (llt.info() == Eigen::Success && llt.rcond() > kEps) {
      f_ = std::move(llt);
      return true;
    }
    Eigen::PartialPivLU<Matrix> lu(m);
    count += lu_factor_cost(n);
    f_ = std::move(lu);
    return lu_regular(std::get<Eigen::PartialPivLU<Matrix>>(f_));
  }

  Matrix solve(const Matrix& rhs, std::int64_t& count) const {
    const auto n = rhs.rows();
    if (const auto* llt = std::get_if<Eigen::LLT<Matrix>>(&f_)) {
      count += llt_solve_cost(n, rhs.cols());
      return llt->solve(rhs);
    }
    count += lu_solve_cost(n, rhs.cols());
    return std::get<Eigen::PartialPivLU<Matrix>>(f_).solve(rhs);
  }

 private:
  std::variant<std::monostate, Eigen::LLT<Matrix>, Eigen::PartialPivLU<Matrix>> f_;
};

// Generic LU for non-symmetric blocks of the preconditioned recursion.
class LuFactor {
 public:
  bool compute(const Matrix& m, std::int64_t& count) {
    lu_.compute(m);
    count += lu_factor_cost(m.rows());
    return lu_regular(lu_);
  }
  Matrix solve(const Matrix& rhs, std::int64_t& count) const {
    count += lu_solve_cost(rhs.rows(), rhs.cols());
    return lu_.solve(rhs);
  }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

[[noreturn]] void throw_singular_block(int k) {
  std::ostringstream os;
  os << "block " << k
     << " of the forward recursion is numerically singular; the data may not be "
        "sufficiently varied (try preconditioning or collect more trajectories)";
  throw SingularBlock(k, os.str());
}

void finalize(SolveReport& r, const StackedData& data, const LambdaSchedule& sched) {
  r.final_cost = cost(r.model, data, sched);
  r.gradient_norm = frobenius(gradient(r.model, data, sched));
  r.multiply_count = r.forward_multiplies + r.backward_multiplies;
}

std::vector<Matrix> forward_backward_fast(const TridiagonalSystem& sys, SolveReport& r) {
  const int N = sys.N;
  const auto n = static_cast<std::int64_t>(sys.n());
  const auto p = static_cast<std::int64_t>(sys.p);
  std::vector<BlockFactor> factors(N);
  std::vector<Matrix> Y(N);
  const Matrix I = Matrix::Identity(n, n);

  std::int64_t& fwd = r.forward_multiplies;
  if (!factors[0].compute(sys.diag[0], fwd)) throw_singular_block(0);
  Y[0] = factors[0].solve(sys.theta[0], fwd);
  for (int k = 1; k < N; ++k) {
    const double lam = sys.coupling(k);
    const Matrix prev_inv = factors[k - 1].solve(I, fwd);
    const Matrix Lambda = sys.diag[k] - (lam * lam) * prev_inv;
    fwd += n * n + 1;
    if (!factors[k].compute(Lambda, fwd)) throw_singular_block(k);
    Y[k] = factors[k].solve(sys.theta[k] + lam * Y[k - 1], fwd);
    fwd += n * p;
  }

  std::int64_t& bwd = r.backward_multiplies;
  std::vector<Matrix> C(N);
  C[N - 1] = Y[N - 1];
  for (int k = N - 2; k >= 0; --k) {
    C[k] = Y[k] + sys.coupling(k + 1) * factors[k].solve(C[k + 1], bwd);
    bwd += n * p;
  }
  return C;
}

// Explicit inverses with every instant charged the same operations; the
// weights outside 1..N-1 are zero so the boundary steps reuse the interior
// formulas.
std::vector<Matrix> forward_backward_textbook(const TridiagonalSystem& sys, SolveReport& r) {
  const int N = sys.N;
  const auto n = static_cast<std::int64_t>(sys.n());
  const auto p = static_cast<std::int64_t>(sys.p);
  const auto weight = [&](int k) { return (k >= 1 && k <= N - 1) ? sys.coupling(k) : 0.0; };
  const std::int64_t inversion = n * n * n;
  const std::int64_t scalar_times_matrix = n * n;
  const std::int64_t product = p * n * n;

  std::vector<Matrix> inv(N);
  std::vector<Matrix> Y(N);
  Matrix prev_inv = Matrix::Zero(n, n);
  Matrix prev_y = Matrix::Zero(n, p);
  std::int64_t& fwd = r.forward_multiplies;
  for (int k = 0; k < N; ++k) {
    const double lam = weight(k);
    const Matrix Lambda = sys.diag[k] - (lam * lam) * prev_inv;
    fwd += scalar_times_matrix;
    Eigen::PartialPivLU<Matrix> lu(Lambda);
    if (!lu_regular(lu)) throw_singular_block(k);
    inv[k] = lu.inverse();
    fwd += inversion;
    const Matrix rhs = sys.theta[k] + lam * prev_y;
    fwd += scalar_times_matrix;
    Y[k] = inv[k] * rhs;
    fwd += product;
    prev_inv = inv[k];
    prev_y = Y[k];
  }

  std::vector<Matrix> C(N);
  Matrix next = Matrix::Zero(n, p);
  std::int64_t& bwd = r.backward_multiplies;
  for (int k = N - 1; k >= 0; --k) {
    const Matrix scaled = weight(k + 1) * inv[k];
    bwd += scalar_times_matrix;
    C[k] = Y[k] + scaled * next;
    bwd += product;
    next = C[k];
  }
  return C;
}

bool needs_preconditioning(const TridiagonalSystem& sys, double threshold) {
  for (const auto& S : sys.diag) {
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) return true;
    const double rc = llt.rcond();
    if (!(rc > 0.0) || 1.0 / rc > threshold) return true;
  }
  return false;
}

}  // namespace

Matrix TridiagonalSystem::dense() const {
  const int nn = n();
  Matrix A = Matrix::Zero(static_cast<Eigen::Index>(N) * nn, static_cast<Eigen::Index>(N) * nn);
  for (int k = 0; k < N; ++k) {
    A.block(k * nn, k * nn, nn, nn) = diag[k];
    if (k > 0) {
      const Matrix off = -coupling(k) * Matrix::Identity(nn, nn);
      A.block(k * nn, (k - 1) * nn, nn, nn) = off;
      A.block((k - 1) * nn, k * nn, nn, nn) = off;
    }
  }
  return A;
}

TridiagonalSystem build_system(const StackedData& data, const LambdaSchedule& sched) {
  if (static_cast<int>(data.D.size()) != data.N || static_cast<int>(data.Xnext.size()) != data.N) {
    throw DimensionError("stacked data must hold N blocks");
  }
  TridiagonalSystem sys;
  sys.p = data.p;
  sys.q = data.q;
  sys.N = data.N;
  sys.lambda = sched.materialize(data.N);
  const auto lam = detail::padded_lambdas(sched, data.N);
  const int n = data.n();
  sys.diag.reserve(data.N);
  sys.theta.reserve(data.N);
  for (int k = 0; k < data.N; ++k) {
    const auto& D = data.D[k];
    if (D.cols() != n || data.Xnext[k].rows() != data.p || data.Xnext[k].cols() != D.rows()) {
      throw DimensionError("stacked block shape mismatch at instant " + std::to_string(k));
    }
    Matrix S = D.transpose() * D;
    S.diagonal().array() += lam[k] + lam[k + 1];
    sys.diag.push_back(std::move(S));
    sys.theta.push_back(D.transpose() * data.Xnext[k].transpose());
  }
  return sys;
}

SolveReport cosmic_solve(const StackedData& data, const LambdaSchedule& sched,
                         const CosmicOptions& opts) {
  if (opts.precondition == Precondition::On) {
    return cosmic_solve_preconditioned(data, sched, opts);
  }
  const auto start = Clock::now();
  const auto sys = build_system(data, sched);
  if (opts.precondition == Precondition::Auto &&
      needs_preconditioning(sys, opts.auto_condition_threshold)) {
    return cosmic_solve_preconditioned(data, sched, opts);
  }

  SolveReport r{.solver = "cosmic", .model = LtvModel::zeros(data.p, data.q, data.N)};
  auto C = opts.count_mode == CountMode::Textbook ? forward_backward_textbook(sys, r)
                                                  : forward_backward_fast(sys, r);
  r.elapsed = seconds_since(start);
  r.model = LtvModel(data.p, data.q, data.N, std::move(C));
  r.iterations = 1;
  finalize(r, data, sched);
  return r;
}

SolveReport cosmic_solve_preconditioned(const StackedData& data, const LambdaSchedule& sched,
                                        const CosmicOptions&) {
  const auto start = Clock::now();
  const auto sys = build_system(data, sched);
  const int N = sys.N;
  const auto n = static_cast<std::int64_t>(sys.n());
  const auto p = static_cast<std::int64_t>(sys.p);
  const Matrix I = Matrix::Identity(n, n);

  SolveReport r{.solver = "cosmic", .model = LtvModel::zeros(data.p, data.q, data.N)};
  r.preconditioned = true;
  std::int64_t& fwd = r.forward_multiplies;

  // Row k scaled by S_kk^{-1}: unit diagonal, dense off-diagonals.
  std::vector<Matrix> lower(N);  // S^PC_{k,k-1}
  std::vector<Matrix> upper(N);  // S^PC_{k,k+1}
  std::vector<Matrix> theta(N);
  for (int k = 0; k < N; ++k) {
    BlockFactor f;
    if (!f.compute(sys.diag[k], fwd)) throw_singular_block(k);
    const Matrix S_inv = f.solve(I, fwd);
    if (k > 0) {
      lower[k] = -sys.coupling(k) * S_inv;
      fwd += n * n;
    }
    if (k < N - 1) {
      upper[k] = -sys.coupling(k + 1) * S_inv;
      fwd += n * n;
    }
    theta[k] = S_inv * sys.theta[k];
    fwd += p * n * n;
  }

  std::vector<LuFactor> factors(N);
  std::vector<Matrix> Y(N);
  if (!factors[0].compute(I, fwd)) throw_singular_block(0);
  Y[0] = factors[0].solve(theta[0], fwd);
  for (int k = 1; k < N; ++k) {
    const Matrix omega = lower[k] * factors[k - 1].solve(upper[k - 1], fwd);
    fwd += n * n * n;
    if (!factors[k].compute(I - omega, fwd)) throw_singular_block(k);
    Y[k] = factors[k].solve(theta[k] - lower[k] * Y[k - 1], fwd);
    fwd += p * n * n;
  }

  std::int64_t& bwd = r.backward_multiplies;
  std::vector<Matrix> C(N);
  C[N - 1] = Y[N - 1];
  for (int k = N - 2; k >= 0; --k) {
    C[k] = Y[k] - factors[k].solve(upper[k] * C[k + 1], bwd);
    bwd += p * n * n;
  }

  r.elapsed = seconds_since(start);
  r.model = LtvModel(data.p, data.q, data.N, std::move(C));
  r.iterations = 1;
  finalize(r, data, sched);
  return r;
}

SolveReport sbcd_solve(const StackedData& data, const LambdaSchedule& sched,
                       const SbcdOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw InvalidArgument("SBCD epsilon must be positive");
  if (opts.max_iters < 1) throw InvalidArgument("SBCD needs at least one iteration");

  const auto start = Clock::now();
  const auto sys = build_system(data, sched);
  const int N = sys.N;
  const auto n = static_cast<std::int64_t>(sys.n());
  const auto p = static_cast<std::int64_t>(sys.p);
  const auto lam = detail::padded_lambdas(sched, N);

  SolveReport r{.solver = "sbcd", .model = LtvModel::zeros(data.p, data.q, N)};
  std::int64_t& count = r.forward_multiplies;

  std::vector<BlockFactor> factors(N);
  std::vector<Matrix> gram(N);
  for (int k = 0; k < N; ++k) {
    if (!factors[k].compute(sys.diag[k], count)) throw_singular_block(k);
    gram[k] = data.D[k].transpose() * data.D[k];
  }

  std::mt19937_64 rng(opts.seed);
  std::vector<Matrix> C(N);
  if (opts.initial) {
    detail::check_model_data(*opts.initial, data);
    C = opts.initial->C();
  } else {
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (auto& c : C) {
      c.resize(n, p);
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, j) = unif(rng);
      }
    }
  }

  // Data and smoothness parts of the gradient, kept separately and patched
  // after every block update.
  std::vector<Matrix> grad_h(N);
  std::vector<Matrix> grad_g(N);
  const auto refresh = [&] {
    for (int k = 0; k < N; ++k) {
      grad_h[k] = gram[k] * C[k] - sys.theta[k];
      grad_g[k] = Matrix::Zero(n, p);
      if (k > 0) grad_g[k] += lam[k] * (C[k] - C[k - 1]);
      if (k < N - 1) grad_g[k] += lam[k + 1] * (C[k] - C[k + 1]);
    }
  };
  const auto grad_sq = [&] {
    double s = 0.0;
    for (int k = 0; k < N; ++k) s += (grad_h[k] + grad_g[k]).squaredNorm();
    return s;
  };
  refresh();

  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  r.converged = false;
  std::int64_t sweeps = 0;
  while (true) {
    if (grad_sq() <= opts.epsilon) {
      // Incremental bookkeeping drifts; confirm against a fresh gradient.
      refresh();
      if (grad_sq() <= opts.epsilon) {
        r.converged = true;
        break;
      }
    }
    if (sweeps >= opts.max_iters) break;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i : order) {
      Matrix rhs = sys.theta[i];
      if (i > 0) rhs += lam[i] * C[i - 1];
      if (i < N - 1) rhs += lam[i + 1] * C[i + 1];
      count += 2 * n * p;
      Matrix updated = factors[i].solve(rhs, count);
      const Matrix delta = updated - C[i];
      C[i] = std::move(updated);

      grad_h[i] += gram[i] * delta;
      count += p * n * n;
      if (i > 0) {
        grad_g[i - 1] -= lam[i] * delta;
        grad_g[i] += lam[i] * delta;
        count += 2 * n * p;
      }
      if (i < N - 1) {
        grad_g[i + 1] -= lam[i + 1] * delta;
        grad_g[i] += lam[i + 1] * delta;
        count += 2 * n * p;
      }
      if (opts.on_update) opts.on_update(i, C);
    }
    ++sweeps;
  }

  r.elapsed = seconds_since(start);
  r.iterations = sweeps;
  r.model = LtvModel(data.p, data.q, N, std::move(C));
  finalize(r, data, sched);
  return r;
}

SolveReport oracle_solve(const StackedData& data, const LambdaSchedule& sched,
                         const OracleOptions& opts) {
  const auto dim = static_cast<std::int64_t>(data.N) * data.n();
  if (dim > opts.max_dimension) {
    std::ostringstream os;
    os << "dense system of dimension " << dim << " exceeds the limit of " << opts.max_dimension;
    throw SizeGuard(os.str());
  }
  const auto start = Clock::now();
  const auto sys = build_system(data, sched);
  const int n = sys.n();
  const int p = sys.p;
  const Matrix A = sys.dense();
  Matrix rhs(dim, p);
  for (int k = 0; k < sys.N; ++k) rhs.middleRows(k * n, n) = sys.theta[k];

  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kEps)) {
    throw SingularSystem(
        "normal-equations matrix is singular: dataset covariance not positive definite");
  }
  const Matrix sol = ldlt.solve(rhs);

  SolveReport r{.solver = "oracle", .model = LtvModel::zeros(data.p, data.q, data.N)};
  r.forward_multiplies = llt_factor_cost(dim);
  r.backward_multiplies = llt_solve_cost(dim, p);
  std::vector<Matrix> C(sys.N);
  for (int k = 0; k < sys.N; ++k) C[k] = sol.middleRows(k * n, n);
  r.elapsed = seconds_since(start);
  r.model = LtvModel(data.p, data.q, data.N, std::move(C));
  r.iterations = 1;
  finalize(r, data, sched);
  return r;
}

}  // namespace cosmic
