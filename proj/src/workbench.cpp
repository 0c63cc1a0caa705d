#include "cosmic/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cosmic/diagnostics.hpp"

namespace cosmic {

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty sequence");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void BenchSpec::validate() const {
  if (N_grid.empty()) throw InvalidArgument("N_grid must not be empty");
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    if (N_grid[i] < 2) throw InvalidArgument("every N must be at least 2");
    if (i > 0 && N_grid[i] <= N_grid[i - 1]) throw InvalidArgument("N_grid must be ascending");
  }
  if (solvers.empty()) throw InvalidArgument("no solvers selected");
  for (const auto& s : solvers) {
    if (s != "cosmic" && s != "sbcd" && s != "oracle") {
      throw InvalidArgument("unknown solver \"" + s + "\"");
    }
  }
  if (repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
  if (p < 1 || q < 0 || L < 1) throw InvalidArgument("invalid bench shapes");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
}

BenchSpec bench_spec_from_json(const io::json& j) {
  try {
    BenchSpec s;
    if (j.contains("N_grid")) s.N_grid = j["N_grid"].get<std::vector<int>>();
    if (j.contains("solvers")) s.solvers = j["solvers"].get<std::vector<std::string>>();
    s.repetitions = j.value("repetitions", s.repetitions);
    if (j.contains("shapes")) {
      const auto& sh = j["shapes"];
      s.p = sh.value("p", s.p);
      s.q = sh.value("q", s.q);
      s.L = sh.value("L", s.L);
    }
    s.p = j.value("p", s.p);
    s.q = j.value("q", s.q);
    s.L = j.value("L", s.L);
    s.seed = j.value("seed", s.seed);
    s.lambda = j.value("lambda", s.lambda);
    const auto mode = j.value("accounting", std::string("textbook"));
    if (mode == "textbook") {
      s.count_mode = CountMode::Textbook;
    } else if (mode == "measured") {
      s.count_mode = CountMode::Measured;
    } else {
      throw io::ParseError("accounting must be \"textbook\" or \"measured\"");
    }
    s.oracle_limit = j.value("oracle_limit", s.oracle_limit);
    s.sbcd_epsilon = j.value("sbcd_epsilon", s.sbcd_epsilon);
    s.sbcd_max_iters = j.value("sbcd_max_iters", s.sbcd_max_iters);
    s.validate();
    return s;
  } catch (const io::json::exception& e) {
    throw io::ParseError(std::string("malformed bench spec: ") + e.what());
  }
}

TrajectoryDataset bench_dataset(const BenchSpec& spec, int N) {
  LtvModel truth = [&] {
    if (spec.p == 2 && spec.q == 1) {
      SmdConfig smd;
      smd.N = N;
      return smd_model(smd);
    }
    return random_model(spec.p, spec.q, N, spec.seed);
  }();
  return generate_dataset(truth, spec.L, Excitation{}, NoiseConfig{0.06, 0}, spec.seed);
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
  spec.validate();
  const auto sched = LambdaSchedule::scalar(spec.lambda);
  std::vector<BenchRow> rows;
  for (int N : spec.N_grid) {
    const auto data = assemble_stacked(bench_dataset(spec, N));
    for (const auto& solver : spec.solvers) {
      BenchRow row{.N = N, .solver = solver};
      if (solver == "oracle" &&
          static_cast<std::int64_t>(N) * (spec.p + spec.q) > spec.oracle_limit) {
        row.skipped = true;
        rows.push_back(row);
        continue;
      }
      std::vector<double> times;
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        SolveReport r = [&] {
          if (solver == "cosmic") {
            return cosmic_solve(data, sched, CosmicOptions{.count_mode = spec.count_mode});
          }
          if (solver == "sbcd") {
            SbcdOptions opts;
            opts.epsilon = spec.sbcd_epsilon;
            opts.max_iters = spec.sbcd_max_iters;
            opts.seed = spec.seed;
            return sbcd_solve(data, sched, opts);
          }
          return oracle_solve(data, sched, OracleOptions{.max_dimension = spec.oracle_limit});
        }();
        times.push_back(r.elapsed);
        row.multiply_count = r.multiply_count;
        row.final_cost = r.final_cost;
      }
      row.median_elapsed = median(times);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "N,solver,median_elapsed_s,multiply_count,final_cost\n";
  for (const auto& r : rows) {
    os << r.N << ',' << r.solver << ',';
    if (r.skipped) {
      os << "skipped(size-guard),,\n";
    } else {
      os << io::format_number(r.median_elapsed) << ',' << r.multiply_count << ','
         << io::format_number(r.final_cost) << '\n';
    }
  }
  return os.str();
}

void SweepSpec::validate() const {
  if (lambda_grid.empty() || sigma_grid.empty() || seeds.empty()) {
    throw InvalidArgument("sweep grids and seed list must be non-empty");
  }
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw InvalidArgument("lambda values must be positive");
  }
  for (double s : sigma_grid) {
    if (!(s >= 0.0)) throw InvalidArgument("sigma values must be non-negative");
  }
  if (L < 1) throw InvalidArgument("L must be at least 1");
  smd.validate();
}

SweepSpec sweep_spec_from_json(const io::json& j) {
  try {
    SweepSpec s;
    if (j.contains("lambda_grid")) s.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
    if (j.contains("sigma_grid")) s.sigma_grid = j["sigma_grid"].get<std::vector<double>>();
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    const auto metric = j.value("metric", std::string("estimation"));
    if (metric == "estimation") {
      s.metric = SweepSpec::Metric::Estimation;
    } else if (metric == "prediction") {
      s.metric = SweepSpec::Metric::Prediction;
    } else {
      throw io::ParseError("metric must be \"estimation\" or \"prediction\"");
    }
    s.L = j.value("L", s.L);
    if (j.contains("smd")) s.smd = io::smd_from_json(j["smd"]);
    if (j.contains("excitation")) s.excitation = io::excitation_from_json(j["excitation"]);
    s.validate();
    return s;
  } catch (const io::json::exception& e) {
    throw io::ParseError(std::string("malformed sweep spec: ") + e.what());
  }
}

Matrix run_sweep(const SweepSpec& spec) {
  spec.validate();
  const LtvModel truth = smd_model(spec.smd);
  const auto S = static_cast<Eigen::Index>(spec.sigma_grid.size());
  const auto Lm = static_cast<Eigen::Index>(spec.lambda_grid.size());
  Matrix grid(S, Lm);
  for (Eigen::Index i = 0; i < S; ++i) {
    std::vector<std::vector<double>> samples(Lm);
    for (auto seed : spec.seeds) {
      const auto data = assemble_stacked(generate_dataset(
          truth, spec.L, spec.excitation, NoiseConfig{spec.sigma_grid[i], 0}, seed));
      Trajectory held_out;
      if (spec.metric == SweepSpec::Metric::Prediction) {
        held_out = generate_dataset(truth, 1, spec.excitation, NoiseConfig{}, seed + 1000003)
                       .trajectory(0);
      }
      for (Eigen::Index j = 0; j < Lm; ++j) {
        const auto fit = cosmic_solve(data, LambdaSchedule::scalar(spec.lambda_grid[j]));
        double metric = 0.0;
        if (spec.metric == SweepSpec::Metric::Estimation) {
          metric = estimation_error(fit.model, truth);
        } else {
          const auto err = prediction_error(fit.model, held_out, PredictionMode::Rollout);
          for (double e : err) metric += e;
          metric /= static_cast<double>(err.size());
        }
        samples[j].push_back(metric);
      }
    }
    for (Eigen::Index j = 0; j < Lm; ++j) grid(i, j) = median(samples[j]);
  }
  return grid;
}

std::string sweep_csv(const SweepSpec& spec, const Matrix& grid) {
  std::ostringstream os;
  os << "sigma";
  for (double l : spec.lambda_grid) os << ",lambda=" << io::format_number(l);
  os << '\n';
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    os << io::format_number(spec.sigma_grid[i]);
    for (Eigen::Index j = 0; j < grid.cols(); ++j) os << ',' << io::format_number(grid(i, j));
    os << '\n';
  }
  return os.str();
}

double ControllerResult::median_sum_sq() const { return median(sum_sq_per_seed); }

std::vector<ControllerResult> run_control_bench(const ControlBenchSpec& spec) {
  spec.smd.validate();
  const LtvModel truth = smd_model(spec.smd);
  SmdConfig frozen = spec.smd;
  frozen.ltv = false;
  const LtvModel lti = smd_model(frozen);

  std::vector<Vector> ics = spec.initial_conditions;
  if (ics.empty()) {
    ics = {Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
    ics[0] << 1.0, 0.0;
    ics[1] << -0.5, 0.5;
    ics[2] << 2.0, -1.0;
  }
  const std::vector<Vector> reference(spec.smd.N + 1, Vector::Zero(2));

  const auto truth_gains = lqr_synthesize(truth, spec.weights);
  const auto lti_gains = lqr_synthesize(lti, spec.weights);

  std::vector<ControllerResult> results(3);
  results[0].name = "cosmic";
  results[1].name = "ground_truth";
  results[2].name = "time_invariant";

  for (auto seed : spec.seeds) {
    const auto data = assemble_stacked(
        generate_dataset(truth, spec.L, Excitation{}, NoiseConfig{spec.sigma, 0}, seed));
    const auto fit = cosmic_solve(data, LambdaSchedule::scalar(spec.lambda));
    const auto fit_gains = lqr_synthesize(fit.model, spec.weights);
    const GainSchedule* gains[3] = {&fit_gains, &truth_gains, &lti_gains};
    for (int c = 0; c < 3; ++c) {
      double total = 0.0;
      results[c].stats.clear();
      for (const auto& x0 : ics) {
        const auto loop = closed_loop_rollout(truth, *gains[c], reference, x0);
        const auto st = tracking_stats(loop.tracking_errors);
        total += st.sum_sq;
        results[c].stats.push_back(st);
        const double offset = std::abs(loop.tracking_errors.front());
        const double ratio = std::abs(loop.tracking_errors.back()) / offset;
        results[c].worst_final_ratio = std::max(results[c].worst_final_ratio, ratio);
      }
      results[c].sum_sq_per_seed.push_back(total);
    }
  }
  return results;
}

}  // namespace cosmic
