#include "cosmic/cli.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cosmic/diagnostics.hpp"
#include "cosmic/io.hpp"
#include "cosmic/workbench.hpp"

namespace cosmic::cli {

namespace {

using io::json;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  bool quiet = false;
};

void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (!g.quiet) out << text;
}

void require_out(const Globals& g) {
  if (g.out.empty()) throw InvalidArgument("--out is required");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse number \"" + item + "\"");
    }
  }
  return v;
}

// generate ------------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::string truth_out;
};

int cmd_generate(const Globals& g, const GenerateArgs& a, std::ostream& out) {
  require_out(g);
  const json cfg = a.config.empty() ? json::object() : io::read_json_file(a.config);
  try {
    const json system = cfg.value("system", json{{"type", "smd"}});
    const auto type = system.value("type", std::string("smd"));
    const LtvModel truth = [&] {
      if (type == "smd") return smd_model(io::smd_from_json(system));
      if (type == "random") {
        return random_model(system.at("p").get<int>(), system.at("q").get<int>(),
                            system.at("N").get<int>(), system.value("seed", g.seed));
      }
      throw io::ParseError("unknown system type \"" + type + "\"");
    }();
    const int L = cfg.value("L", 6);
    const Excitation ex = io::excitation_from_json(cfg.value("excitation", json::object()));
    const json noise_j = cfg.value("noise", json::object());
    const NoiseConfig noise{noise_j.value("sigma", 0.0), noise_j.value("seed", std::uint64_t{0})};
    const auto dataset = generate_dataset(truth, L, ex, noise, g.seed);
    io::write_text_file(g.out, io::to_json(dataset).dump() + "\n");
    if (!a.truth_out.empty()) io::write_text_file(a.truth_out, io::to_json(truth).dump() + "\n");
    emit(g, out,
         json{{"L", L}, {"N", dataset.N()}, {"p", dataset.p()}, {"q", dataset.q()}}.dump() + "\n");
    return kOk;
  } catch (const json::exception& e) {
    throw io::ParseError(std::string("malformed generate config: ") + e.what());
  }
}

// check ---------------------------------------------------------------------

struct CheckArgs {
  std::string data;
  std::optional<double> tol;
  bool per_trajectory = false;
};

int cmd_check(const Globals& g, const CheckArgs& a, std::ostream& out) {
  const auto dataset = io::dataset_from_json(io::read_json_file(a.data));
  const auto report = covariance_sufficiency(dataset, a.tol, a.per_trajectory);
  const auto rank = rank_condition(dataset);
  json j = io::to_json(report);
  j["rank_condition"] = {{"satisfied", rank.satisfied}, {"rank", rank.rank}};
  const auto text = j.dump(2) + "\n";
  if (!g.out.empty()) io::write_text_file(g.out, text);
  emit(g, out, text);
  return kOk;
}

// fit -----------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string solver = "cosmic";
  std::optional<double> lambda;
  std::string lambda_file;
  std::string precondition = "auto";
  std::string accounting = "measured";
  double epsilon = 1e-10;
  std::int64_t max_iters = 1000000;
};

int cmd_fit(const Globals& g, const FitArgs& a, std::ostream& out) {
  require_out(g);
  if (a.lambda.has_value() == !a.lambda_file.empty()) {
    throw InvalidArgument("give exactly one of --lambda and --lambda-file");
  }
  const auto sched = a.lambda ? LambdaSchedule::scalar(*a.lambda)
                              : io::schedule_from_json(io::read_json_file(a.lambda_file));
  const auto data = assemble_stacked(io::dataset_from_json(io::read_json_file(a.data)));

  SolveReport report = [&] {
    if (a.solver == "cosmic") {
      CosmicOptions opts;
      opts.precondition = a.precondition == "on"    ? Precondition::On
                          : a.precondition == "off" ? Precondition::Off
                                                    : Precondition::Auto;
      opts.count_mode = a.accounting == "textbook" ? CountMode::Textbook : CountMode::Measured;
      return cosmic_solve(data, sched, opts);
    }
    if (a.solver == "sbcd") {
      SbcdOptions opts;
      opts.epsilon = a.epsilon;
      opts.max_iters = a.max_iters;
      opts.seed = g.seed;
      return sbcd_solve(data, sched, opts);
    }
    return oracle_solve(data, sched);
  }();
  io::write_text_file(g.out, io::to_json(report.model).dump() + "\n");
  emit(g, out, io::to_json(report, false).dump(2) + "\n");
  return kOk;
}

// eval ----------------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string truth;
  std::string data;
  std::string mode = "one-step";
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
  if (a.truth.empty() && a.data.empty()) {
    throw InvalidArgument("eval needs --truth and/or --data");
  }
  const auto model = io::model_from_json(io::read_json_file(a.model));
  json summary = json::object();
  if (!a.truth.empty()) {
    const auto truth = io::model_from_json(io::read_json_file(a.truth));
    const double err = estimation_error(model, truth);
    summary["estimation_error"] = err;
    summary["relative_estimation_error"] = err / std::max(truth.norm(), 1e-300);
  }
  if (!a.data.empty()) {
    const auto dataset = io::dataset_from_json(io::read_json_file(a.data));
    const auto mode = a.mode == "rollout" ? PredictionMode::Rollout : PredictionMode::OneStep;
    std::ostringstream csv;
    csv << "trajectory,k,error\n";
    double sum = 0.0;
    double worst = 0.0;
    std::size_t count = 0;
    for (int l = 0; l < dataset.L(); ++l) {
      const auto err = prediction_error(model, dataset.trajectory(l), mode);
      for (std::size_t k = 0; k < err.size(); ++k) {
        csv << l << ',' << k << ',' << io::format_number(err[k]) << '\n';
        sum += err[k];
        worst = std::max(worst, err[k]);
        ++count;
      }
    }
    summary["prediction"] = {{"mode", a.mode},
                             {"mean", sum / static_cast<double>(count)},
                             {"max", worst}};
    if (!g.out.empty()) {
      io::write_text_file(g.out, csv.str());
    } else {
      emit(g, out, csv.str());
    }
  }
  emit(g, out, summary.dump(2) + "\n");
  return kOk;
}

// lqr / rollout -------------------------------------------------------------

struct LqrArgs {
  std::string model;
  std::string weights;
};

int cmd_lqr(const Globals& g, const LqrArgs& a, std::ostream& out) {
  require_out(g);
  const auto model = io::model_from_json(io::read_json_file(a.model));
  const LqrWeights w =
      a.weights.empty() ? LqrWeights{} : io::weights_from_json(io::read_json_file(a.weights));
  const auto gains = lqr_synthesize(model, w);
  io::write_text_file(g.out, io::to_json(gains).dump() + "\n");
  emit(g, out, json{{"N", gains.K.size()}, {"q", model.q()}, {"p", model.p()}}.dump() + "\n");
  return kOk;
}

struct RolloutArgs {
  std::string plant;
  std::string gains;
  std::string x0;
  std::string reference;
  double sigma = 0.0;
};

int cmd_rollout(const Globals& g, const RolloutArgs& a, std::ostream& out) {
  const auto plant = io::model_from_json(io::read_json_file(a.plant));
  const auto gains = io::gains_from_json(io::read_json_file(a.gains));
  const auto x0v = parse_list(a.x0);
  if (static_cast<int>(x0v.size()) != plant.p()) {
    throw DimensionError("--x0 must have p entries");
  }
  const Vector x0 = Eigen::Map<const Vector>(x0v.data(), plant.p());

  std::vector<Vector> reference(plant.N() + 1, Vector::Zero(plant.p()));
  std::optional<std::vector<Vector>> input_ref;
  if (!a.reference.empty()) {
    const json rj = io::read_json_file(a.reference);
    try {
      const auto& states = rj.at("states");
      if (static_cast<int>(states.size()) != plant.N() + 1) {
        throw DimensionError("reference must hold N+1 states");
      }
      for (int k = 0; k <= plant.N(); ++k) {
        const auto v = states[k].get<std::vector<double>>();
        if (static_cast<int>(v.size()) != plant.p()) {
          throw DimensionError("reference state dimension mismatch");
        }
        reference[k] = Eigen::Map<const Vector>(v.data(), plant.p());
      }
      if (rj.contains("inputs")) {
        input_ref.emplace();
        for (const auto& u : rj["inputs"]) {
          const auto v = u.get<std::vector<double>>();
          input_ref->push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
      }
    } catch (const json::exception& e) {
      throw io::ParseError(std::string("malformed reference: ") + e.what());
    }
  }

  const auto loop = closed_loop_rollout(plant, gains, reference, x0, NoiseConfig{a.sigma, g.seed},
                                        input_ref ? &*input_ref : nullptr);
  std::ostringstream csv;
  csv << 'k';
  for (int i = 0; i < plant.p(); ++i) csv << ",x" << i;
  for (int i = 0; i < plant.q(); ++i) csv << ",u" << i;
  csv << ",tracking_error\n";
  for (int k = 0; k <= plant.N(); ++k) {
    csv << k;
    for (int i = 0; i < plant.p(); ++i) csv << ',' << io::format_number(loop.states[k](i));
    for (int i = 0; i < plant.q(); ++i) {
      csv << ',' << (k < plant.N() ? io::format_number(loop.inputs[k](i)) : std::string());
    }
    csv << ',' << io::format_number(loop.tracking_errors[k]) << '\n';
  }
  if (!g.out.empty()) {
    io::write_text_file(g.out, csv.str());
  } else {
    emit(g, out, csv.str());
  }
  emit(g, out, io::to_json(tracking_stats(loop.tracking_errors)).dump(2) + "\n");
  return kOk;
}

// bench / sweep -------------------------------------------------------------

int cmd_bench(const Globals& g, const std::string& spec_path, std::ostream& out) {
  require_out(g);
  auto spec = bench_spec_from_json(io::read_json_file(spec_path));
  const auto csv = bench_csv(run_bench(spec));
  io::write_text_file(g.out, csv);
  emit(g, out, csv);
  return kOk;
}

int cmd_sweep(const Globals& g, const std::string& spec_path, std::ostream& out) {
  require_out(g);
  const auto spec = sweep_spec_from_json(io::read_json_file(spec_path));
  const auto csv = sweep_csv(spec, run_sweep(spec));
  io::write_text_file(g.out, csv);
  emit(g, out, csv);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identification of linear time-varying systems and LQR synthesis"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output file");
  app.add_flag("--quiet", g.quiet, "Suppress standard output");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Simulate a trajectory dataset");
  generate->add_option("--config", gen.config, "Generation config (JSON)")->check(CLI::ExistingFile);
  generate->add_option("--truth-out", gen.truth_out, "Write the ground-truth model here");

  CheckArgs chk;
  auto* check = app.add_subcommand("check", "Data sufficiency report");
  check->add_option("--data", chk.data, "Dataset (JSON)")->required();
  check->add_option("--tol", chk.tol, "Eigenvalue tolerance");
  check->add_flag("--per-trajectory", chk.per_trajectory, "Include per-trajectory covariances");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Identify a model");
  fit->add_option("--data", fa.data, "Dataset (JSON)")->required();
  fit->add_option("--solver", fa.solver)->check(CLI::IsMember({"cosmic", "sbcd", "oracle"}));
  fit->add_option("--lambda", fa.lambda, "Scalar smoothing weight");
  fit->add_option("--lambda-file", fa.lambda_file, "Schedule (JSON)");
  fit->add_option("--precondition", fa.precondition)->check(CLI::IsMember({"auto", "on", "off"}));
  fit->add_option("--accounting", fa.accounting)->check(CLI::IsMember({"measured", "textbook"}));
  fit->add_option("--epsilon", fa.epsilon, "SBCD tolerance on the squared gradient norm");
  fit->add_option("--max-iters", fa.max_iters, "SBCD sweep budget");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Estimation and prediction errors");
  eval->add_option("--model", ea.model, "Estimated model (JSON)")->required();
  eval->add_option("--truth", ea.truth, "Ground-truth model (JSON)");
  eval->add_option("--data", ea.data, "Held-out dataset (JSON)");
  eval->add_option("--mode", ea.mode)->check(CLI::IsMember({"one-step", "rollout"}));

  LqrArgs la;
  auto* lqr = app.add_subcommand("lqr", "Finite-horizon LQR gains");
  lqr->add_option("--model", la.model, "Model (JSON)")->required();
  lqr->add_option("--weights", la.weights, "Weights (JSON)");

  RolloutArgs ra;
  auto* rollout = app.add_subcommand("rollout", "Closed-loop simulation");
  rollout->add_option("--plant", ra.plant, "Plant model (JSON)")->required();
  rollout->add_option("--gains", ra.gains, "Gain schedule (JSON)")->required();
  rollout->add_option("--x0", ra.x0, "Initial state, comma separated")->required();
  rollout->add_option("--reference", ra.reference, "Reference {\"states\":[...]} (JSON)");
  rollout->add_option("--sigma", ra.sigma, "Measurement noise on the fed-back state");

  std::string bench_spec;
  auto* bench = app.add_subcommand("bench", "Solver timing table");
  bench->add_option("--spec", bench_spec, "Bench spec (JSON)")->required();

  std::string sweep_spec;
  auto* sweep = app.add_subcommand("sweep", "Noise x lambda error grid");
  sweep->add_option("--spec", sweep_spec, "Sweep spec (JSON)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(g, gen, out);
    if (check->parsed()) return cmd_check(g, chk, out);
    if (fit->parsed()) return cmd_fit(g, fa, out);
    if (eval->parsed()) return cmd_eval(g, ea, out);
    if (lqr->parsed()) return cmd_lqr(g, la, out);
    if (rollout->parsed()) return cmd_rollout(g, ra, out);
    if (bench->parsed()) return cmd_bench(g, bench_spec, out);
    if (sweep->parsed()) return cmd_sweep(g, sweep_spec, out);
  } catch (const SingularBlock& e) {
    err << "error: " << e.what() << "\nhint: " << kSufficiencyHint << "\n";
    return kMath;
  } catch (const SingularSystem& e) {
    err << "error: " << e.what() << "\nhint: " << kSufficiencyHint << "\n";
    return kMath;
  } catch (const SingularInputCost& e) {
    err << "error: " << e.what() << "\n";
    return kMath;
  } catch (const SizeGuard& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace cosmic::cli
