#include "cosmic/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace cosmic {

namespace {

std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto v : parts) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

void SmdConfig::validate() const {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (N < 1) throw InvalidArgument("N must be at least 1");
  if (!(std::abs(alpha_k) < 1.0) || !(std::abs(alpha_c) < 1.0)) {
    throw InvalidArgument("modulation depths must satisfy |alpha| < 1");
  }
}

void discretize_zoh(const Matrix& Ac, const Matrix& Bc, double dt, Matrix& Ad, Matrix& Bd) {
  const auto p = Ac.rows();
  const auto q = Bc.cols();
  Matrix M = Matrix::Zero(p + q, p + q);
  M.topLeftCorner(p, p) = Ac * dt;
  M.topRightCorner(p, q) = Bc * dt;
  const Matrix E = M.exp();
  Ad = E.topLeftCorner(p, p);
  Bd = E.topRightCorner(p, q);
}

LtvModel smd_model(const SmdConfig& config) {
  config.validate();
  std::vector<Matrix> A(config.N);
  std::vector<Matrix> B(config.N);
  Matrix Bc(2, 1);
  Bc << 0.0, 1.0 / config.mass;
  for (int k = 0; k < config.N; ++k) {
    const double t = config.ltv ? k * config.dt : 0.0;
    const double s = std::sin(config.omega * t);
    const double stiffness = config.k0 * (1.0 + config.alpha_k * s);
    const double damping = config.c0 * (1.0 + config.alpha_c * s);
    Matrix Ac(2, 2);
    Ac << 0.0, 1.0, -stiffness / config.mass, -damping / config.mass;
    discretize_zoh(Ac, Bc, config.dt, A[k], B[k]);
  }
  return LtvModel::from_ab(A, B);
}

std::vector<Vector> simulate(const LtvModel& model, const Vector& x0,
                             const std::vector<Vector>& inputs) {
  if (x0.size() != model.p()) throw DimensionError("initial state dimension mismatch");
  if (static_cast<int>(inputs.size()) != model.N()) {
    throw DimensionError("input sequence length must equal the model horizon");
  }
  std::vector<Vector> x(model.N() + 1);
  x[0] = x0;
  for (int k = 0; k < model.N(); ++k) {
    if (inputs[k].size() != model.q()) throw DimensionError("input dimension mismatch");
    x[k + 1] = model.A(k) * x[k] + model.B(k) * inputs[k];
  }
  return x;
}

TrajectoryDataset generate_dataset(const LtvModel& model, int L, const Excitation& excitation,
                                   const NoiseConfig& noise, std::uint64_t seed) {
  if (L < 1) throw InvalidArgument("need at least one trajectory");
  if (!(noise.sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  const int p = model.p();
  const int q = model.q();
  const int N = model.N();

  std::vector<Trajectory> trajectories(L);
  for (int l = 0; l < L; ++l) {
    auto rng = make_rng({seed, static_cast<std::uint64_t>(l), 0});

    Vector x0(p);
    if (excitation.initial == Excitation::Initial::Uniform) {
      std::uniform_real_distribution<double> unif(-excitation.initial_scale,
                                                  excitation.initial_scale);
      for (int i = 0; i < p; ++i) x0(i) = unif(rng);
    } else {
      std::normal_distribution<double> normal(0.0, excitation.initial_scale);
      for (int i = 0; i < p; ++i) x0(i) = normal(rng);
    }

    std::vector<Vector> u(N, Vector::Zero(q));
    if (excitation.input == Excitation::Input::White) {
      std::normal_distribution<double> normal(0.0, excitation.input_scale);
      for (auto& v : u) {
        for (int i = 0; i < q; ++i) v(i) = normal(rng);
      }
    } else if (excitation.input == Excitation::Input::Sinusoids && !excitation.frequencies.empty()) {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      const double amp =
          excitation.input_scale / std::sqrt(static_cast<double>(excitation.frequencies.size()));
      for (int i = 0; i < q; ++i) {
        for (double w : excitation.frequencies) {
          const double ph = phase(rng);
          for (int k = 0; k < N; ++k) u[k](i) += amp * std::sin(w * k + ph);
        }
      }
    }

    auto& t = trajectories[l];
    t.states = simulate(model, x0, u);
    t.inputs = std::move(u);
    if (noise.sigma > 0.0) {
      auto noise_rng = make_rng({seed, noise.seed, static_cast<std::uint64_t>(l), 1});
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& x : t.states) {
        for (int i = 0; i < p; ++i) x(i) += noise.sigma * normal(noise_rng);
      }
    }
  }
  return TrajectoryDataset(p, q, N, std::move(trajectories));
}

LtvModel random_model(int p, int q, int N, std::uint64_t seed) {
  if (p < 1 || q < 0 || N < 1) throw DimensionError("invalid model dimensions");
  auto rng = make_rng({seed, 0x5eed});
  Matrix A0 = gaussian_matrix(p, p, rng);
  Matrix A1 = gaussian_matrix(p, p, rng);
  const Matrix B0 = gaussian_matrix(p, q, rng);
  const Matrix B1 = gaussian_matrix(p, q, rng);
  A0 *= 0.85 / std::max(spectral_norm(A0), 1e-12);
  A1 *= 0.1 / std::max(spectral_norm(A1), 1e-12);

  std::vector<Matrix> A(N);
  std::vector<Matrix> B(N);
  for (int k = 0; k < N; ++k) {
    const double s = std::sin(2.0 * std::numbers::pi * k / std::max(N, 2));
    A[k] = A0 + s * A1;
    B[k] = B0 + 0.2 * s * B1;
  }
  return LtvModel::from_ab(A, B);
}

}  // namespace cosmic
