#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cosmic/control.hpp"
#include "cosmic/io.hpp"
#include "cosmic/sim.hpp"
#include "cosmic/solvers.hpp"

namespace cosmic {

// Solver timing over a grid of horizon lengths.
struct BenchSpec {
  std::vector<int> N_grid = {100, 1000};
  std::vector<std::string> solvers = {"cosmic"};
  int repetitions = 5;
  int p = 2;
  int q = 1;
  int L = 6;
  std::uint64_t seed = 0;
  double lambda = 1e-3;
  CountMode count_mode = CountMode::Textbook;
  int oracle_limit = 4000;
  double sbcd_epsilon = 1e-10;
  std::int64_t sbcd_max_iters = 1000000;

  void validate() const;
};

struct BenchRow {
  int N = 0;
  std::string solver;
  bool skipped = false;
  double median_elapsed = 0.0;
  std::int64_t multiply_count = 0;
  double final_cost = 0.0;
};

BenchSpec bench_spec_from_json(const io::json& j);

/// Data for a bench cell: the SMD plant for (p, q) = (2, 1), a random model otherwise.
TrajectoryDataset bench_dataset(const BenchSpec& spec, int N);

std::vector<BenchRow> run_bench(const BenchSpec& spec);

/// Columns N,solver,median_elapsed_s,multiply_count,final_cost.
std::string bench_csv(const std::vector<BenchRow>& rows);

// Estimation quality over a (sigma, lambda) grid on the SMD plant.
struct SweepSpec {
  enum class Metric { Estimation, Prediction };

  std::vector<double> lambda_grid = {1e-3, 1e-1, 1e1, 1e3, 1e5, 1e7};
  std::vector<double> sigma_grid = {0.0, 0.006, 0.06, 0.6};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Metric metric = Metric::Estimation;
  int L = 6;
  SmdConfig smd;
  Excitation excitation;

  void validate() const;
};

SweepSpec sweep_spec_from_json(const io::json& j);

/// Median metric over seeds; rows follow sigma_grid, columns lambda_grid.
Matrix run_sweep(const SweepSpec& spec);

std::string sweep_csv(const SweepSpec& spec, const Matrix& grid);

// Closed-loop comparison of LQR designs on the SMD plant.
struct ControlBenchSpec {
  SmdConfig smd;
  int L = 6;
  double sigma = 0.06;
  double lambda = 1e5;
  LqrWeights weights;
  std::vector<Vector> initial_conditions;  // defaults to three offsets
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
};

struct ControllerResult {
  std::string name;
  std::vector<double> sum_sq_per_seed;   // summed over initial conditions
  std::vector<TrackingStats> stats;      // last seed, one per initial condition
  double worst_final_ratio = 0.0;        // max |e(N)| / |e(0)| over seeds and ICs
  double median_sum_sq() const;
};

/// Results for the identified-model, ground-truth and frozen-LTI controllers.
std::vector<ControllerResult> run_control_bench(const ControlBenchSpec& spec);

double median(std::vector<double> values);

}  // namespace cosmic
