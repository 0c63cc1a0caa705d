#include "cosmic/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cosmic::io {

namespace {

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& j, Eigen::Index expected, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
    std::ostringstream os;
    os << what << " must be an array of " << expected << " numbers";
    throw ParseError(os.str());
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v(i) = j[i].get<double>();
  return v;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    std::ostringstream os;
    os << what << " must have " << rows << " rows";
    throw ParseError(os.str());
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = vector_from(j[i], cols, what).transpose();
  return m;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

json to_json(const TrajectoryDataset& dataset) {
  json trajectories = json::array();
  for (const auto& t : dataset.trajectories()) {
    json states = json::array();
    json inputs = json::array();
    for (const auto& x : t.states) states.push_back(vector_json(x));
    for (const auto& u : t.inputs) inputs.push_back(vector_json(u));
    trajectories.push_back({{"states", std::move(states)}, {"inputs", std::move(inputs)}});
  }
  return {{"p", dataset.p()},
          {"q", dataset.q()},
          {"N", dataset.N()},
          {"trajectories", std::move(trajectories)}};
}

TrajectoryDataset dataset_from_json(const json& j) {
  return guarded("dataset", [&] {
    const int p = j.at("p").get<int>();
    const int q = j.at("q").get<int>();
    const int N = j.at("N").get<int>();
    if (p < 1 || q < 0 || N < 2) throw ParseError("dataset dimensions out of range");
    const auto& arr = j.at("trajectories");
    if (!arr.is_array()) throw ParseError("\"trajectories\" must be an array");
    std::vector<Trajectory> trajectories;
    for (const auto& tj : arr) {
      Trajectory t;
      const auto& states = tj.at("states");
      const auto& inputs = tj.at("inputs");
      if (!states.is_array() || !inputs.is_array()) {
        throw ParseError("trajectory states and inputs must be arrays");
      }
      for (const auto& x : states) t.states.push_back(vector_from(x, p, "state"));
      for (const auto& u : inputs) t.inputs.push_back(vector_from(u, q, "input"));
      trajectories.push_back(std::move(t));
    }
    return TrajectoryDataset(p, q, N, std::move(trajectories));
  });
}

json to_json(const LtvModel& model) {
  json C = json::array();
  for (const auto& c : model.C()) C.push_back(matrix_json(c));
  return {{"p", model.p()}, {"q", model.q()}, {"N", model.N()}, {"C", std::move(C)}};
}

LtvModel model_from_json(const json& j) {
  return guarded("model", [&] {
    const int p = j.at("p").get<int>();
    const int q = j.at("q").get<int>();
    const int N = j.at("N").get<int>();
    if (p < 1 || q < 0 || N < 1) throw ParseError("model dimensions out of range");
    const auto& arr = j.at("C");
    if (!arr.is_array() || static_cast<int>(arr.size()) != N) {
      throw ParseError("\"C\" must hold N blocks");
    }
    std::vector<Matrix> C;
    for (const auto& c : arr) C.push_back(matrix_from(c, p + q, p, "model block"));
    return LtvModel(p, q, N, std::move(C));
  });
}

json to_json(const LambdaSchedule& sched) {
  const auto& v = sched.variant();
  if (const auto* s = std::get_if<LambdaSchedule::Scalar>(&v)) return {{"scalar", s->value}};
  if (const auto* z = std::get_if<LambdaSchedule::Zoned>(&v)) {
    json zones = json::array();
    for (const auto& [k, val] : z->zones) zones.push_back({k, val});
    return {{"zones", std::move(zones)}};
  }
  return {{"per_instant", std::get<LambdaSchedule::PerInstant>(v).values}};
}

LambdaSchedule schedule_from_json(const json& j) {
  return guarded("schedule", [&] {
    if (!j.is_object() || j.size() != 1) {
      throw ParseError("schedule must have exactly one of \"scalar\", \"zones\", \"per_instant\"");
    }
    if (j.contains("scalar")) return LambdaSchedule::scalar(j["scalar"].get<double>());
    if (j.contains("zones")) {
      std::vector<std::pair<int, double>> zones;
      for (const auto& z : j["zones"]) {
        if (!z.is_array() || z.size() != 2) throw ParseError("zone must be [instant, value]");
        zones.emplace_back(z[0].get<int>(), z[1].get<double>());
      }
      return LambdaSchedule::zoned(std::move(zones));
    }
    if (j.contains("per_instant")) {
      return LambdaSchedule::per_instant(j["per_instant"].get<std::vector<double>>());
    }
    throw ParseError("unknown schedule kind");
  });
}

json to_json(const GainSchedule& gains) {
  json K = json::array();
  for (const auto& k : gains.K) K.push_back(matrix_json(k));
  return {{"K", std::move(K)}};
}

GainSchedule gains_from_json(const json& j) {
  return guarded("gain schedule", [&] {
    const auto& arr = j.at("K");
    if (!arr.is_array() || arr.empty()) throw ParseError("\"K\" must be a non-empty array");
    GainSchedule g;
    const auto q = static_cast<Eigen::Index>(arr[0].size());
    const Eigen::Index p = q > 0 ? static_cast<Eigen::Index>(arr[0][0].size())
                                 : j.value("p", 0);
    for (const auto& k : arr) g.K.push_back(matrix_from(k, q, p, "gain"));
    return g;
  });
}

json to_json(const SolveReport& r, bool include_model) {
  json j = {{"solver", r.solver},
            {"final_cost", r.final_cost},
            {"gradient_norm", r.gradient_norm},
            {"multiply_count", r.multiply_count},
            {"forward_multiplies", r.forward_multiplies},
            {"backward_multiplies", r.backward_multiplies},
            {"elapsed", r.elapsed},
            {"iterations", r.iterations},
            {"preconditioned", r.preconditioned},
            {"converged", r.converged}};
  if (include_model) j["model"] = to_json(r.model);
  return j;
}

json to_json(const SufficiencyReport& r) {
  json j = {{"sigma", matrix_json(r.sigma)},
            {"min_eigenvalue", r.min_eigenvalue},
            {"tolerance", r.tolerance},
            {"sufficient", r.sufficient},
            {"rank", r.rank}};
  if (!r.per_trajectory_sigmas.empty()) {
    json per = json::array();
    for (const auto& s : r.per_trajectory_sigmas) per.push_back(matrix_json(s));
    j["per_trajectory_sigmas"] = std::move(per);
  }
  return j;
}

json to_json(const TrackingStats& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"sum_sq", s.sum_sq}};
}

SmdConfig smd_from_json(const json& j) {
  return guarded("SMD config", [&] {
    SmdConfig c;
    c.mass = j.value("mass", c.mass);
    c.k0 = j.value("k0", c.k0);
    c.c0 = j.value("c0", c.c0);
    c.alpha_k = j.value("alpha_k", c.alpha_k);
    c.alpha_c = j.value("alpha_c", c.alpha_c);
    c.omega = j.value("omega", c.omega);
    c.dt = j.value("dt", c.dt);
    c.N = j.value("N", c.N);
    c.ltv = j.value("ltv", c.ltv);
    c.validate();
    return c;
  });
}

json to_json(const SmdConfig& c) {
  return {{"mass", c.mass},       {"k0", c.k0},       {"c0", c.c0},
          {"alpha_k", c.alpha_k}, {"alpha_c", c.alpha_c}, {"omega", c.omega},
          {"dt", c.dt},           {"N", c.N},         {"ltv", c.ltv}};
}

Excitation excitation_from_json(const json& j) {
  return guarded("excitation", [&] {
    Excitation e;
    if (j.contains("x0")) {
      const auto& x0 = j["x0"];
      const auto kind = x0.value("kind", std::string("uniform"));
      if (kind == "uniform") {
        e.initial = Excitation::Initial::Uniform;
      } else if (kind == "gaussian") {
        e.initial = Excitation::Initial::Gaussian;
      } else {
        throw ParseError("unknown x0 kind \"" + kind + "\"");
      }
      e.initial_scale = x0.value("scale", e.initial_scale);
    }
    if (j.contains("inputs")) {
      const auto& in = j["inputs"];
      const auto kind = in.value("kind", std::string("white"));
      if (kind == "zero") {
        e.input = Excitation::Input::Zero;
      } else if (kind == "white") {
        e.input = Excitation::Input::White;
      } else if (kind == "sinusoids") {
        e.input = Excitation::Input::Sinusoids;
        if (in.contains("frequencies")) {
          e.frequencies = in["frequencies"].get<std::vector<double>>();
        }
      } else {
        throw ParseError("unknown input kind \"" + kind + "\"");
      }
      e.input_scale = in.value("scale", e.input_scale);
    }
    if (!(e.initial_scale >= 0.0) || !(e.input_scale >= 0.0)) {
      throw ParseError("excitation scales must be non-negative");
    }
    return e;
  });
}

LqrWeights weights_from_json(const json& j) {
  return guarded("LQR weights", [&] {
    LqrWeights w;
    w.q_x = j.value("q_x", w.q_x);
    w.q_v = j.value("q_v", w.q_v);
    w.r = j.value("r", w.r);
    if (j.contains("position_mask")) w.position_mask = j["position_mask"].get<std::vector<bool>>();
    return w;
  });
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("failed writing " + path);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace cosmic::io
