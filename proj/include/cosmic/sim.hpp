#pragma once

#include <cstdint>
#include <vector>

#include "cosmic/core.hpp"

namespace cosmic {

/**
 * Spring-mass-damper with sinusoidally modulated stiffness and damping:
 * k(t) = k0 (1 + alpha_k sin(omega t)), c(t) = c0 (1 + alpha_c sin(omega t)).
 * State is (position, velocity), input a force.
 */
struct SmdConfig {
  double mass = 1.0;      // kg
  double k0 = 1.0;        // N/m
  double c0 = 0.2;        // N s/m
  double alpha_k = 0.5;
  double alpha_c = 0.3;
  double omega = 0.5;     // rad/s
  double dt = 0.1;        // s
  int N = 100;
  bool ltv = true;        // false freezes the coefficients at t = 0

  void validate() const;
};

struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Ground-truth model from per-step zero-order-hold discretization.
LtvModel smd_model(const SmdConfig& config);

/// Zero-order-hold discretization of x' = Ac x + Bc u over one step.
void discretize_zoh(const Matrix& Ac, const Matrix& Bc, double dt, Matrix& Ad, Matrix& Bd);

/// States x(0..N) of x(k+1) = A(k) x(k) + B(k) u(k).
std::vector<Vector> simulate(const LtvModel& model, const Vector& x0,
                             const std::vector<Vector>& inputs);

struct Excitation {
  enum class Initial { Uniform, Gaussian };
  enum class Input { Zero, White, Sinusoids };

  Initial initial = Initial::Uniform;
  double initial_scale = 1.0;  // box half-width or standard deviation
  Input input = Input::White;
  double input_scale = 1.0;    // standard deviation or total amplitude
  std::vector<double> frequencies = {0.05, 0.2, 0.7};  // rad per step, sinusoid bank
};

/**
 * Simulates L trajectories and corrupts the recorded states with i.i.d.
 * Gaussian noise of standard deviation `noise.sigma`.
 *
 * Trajectory l draws its excitation from (seed, l) and its noise from
 * (seed, noise.seed, l), so changing sigma alone rescales the same noise draws.
 */
TrajectoryDataset generate_dataset(const LtvModel& model, int L, const Excitation& excitation,
                                   const NoiseConfig& noise, std::uint64_t seed);

/// Smoothly varying, stable random model; spectral norm of every A(k) <= 0.95.
LtvModel random_model(int p, int q, int N, std::uint64_t seed);

}  // namespace cosmic
