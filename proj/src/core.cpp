#include "cosmic/core.hpp"

#include <cmath>
#include <sstream>

namespace cosmic {

namespace {

std::string where(int l, int k) {
  std::ostringstream os;
  os << "trajectory " << l << ", instant " << k;
  return os.str();
}

void require_positive_finite(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be strictly positive and finite (got " << v << ")";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

TrajectoryDataset::TrajectoryDataset(int p, int q, int N, std::vector<Trajectory> trajectories)
    : p_(p), q_(q), N_(N), trajectories_(std::move(trajectories)) {
  if (p < 1) throw DimensionError("state dimension p must be at least 1");
  if (q < 0) throw DimensionError("input dimension q must be non-negative");
  if (N < 2) throw DimensionError("horizon N must be at least 2");
  if (trajectories_.empty()) throw DimensionError("dataset needs at least one trajectory");

  for (int l = 0; l < L(); ++l) {
    const auto& t = trajectories_[l];
    if (static_cast<int>(t.states.size()) != N + 1) {
      std::ostringstream os;
      os << "trajectory " << l << " has " << t.states.size() << " states, expected " << N + 1;
      throw DimensionError(os.str());
    }
    if (static_cast<int>(t.inputs.size()) != N) {
      std::ostringstream os;
      os << "trajectory " << l << " has " << t.inputs.size() << " inputs, expected " << N;
      throw DimensionError(os.str());
    }
    for (int k = 0; k <= N; ++k) {
      if (t.states[k].size() != p) {
        throw DimensionError("state dimension mismatch at " + where(l, k));
      }
    }
    for (int k = 0; k < N; ++k) {
      if (t.inputs[k].size() != q) {
        throw DimensionError("input dimension mismatch at " + where(l, k));
      }
    }
  }
}

Vector TrajectoryDataset::regressor(int l, int k) const {
  const auto& t = trajectories_.at(l);
  Vector z(p_ + q_);
  z.head(p_) = t.states.at(k);
  z.tail(q_) = t.inputs.at(k);
  return z;
}

StackedData assemble_stacked(const TrajectoryDataset& dataset) {
  StackedData out;
  out.p = dataset.p();
  out.q = dataset.q();
  out.N = dataset.N();
  out.L = dataset.L();
  out.D.reserve(out.N);
  out.Xnext.reserve(out.N);
  for (int k = 0; k < out.N; ++k) {
    Matrix D(out.L, out.n());
    Matrix X(out.p, out.L);
    for (int l = 0; l < out.L; ++l) {
      const auto& t = dataset.trajectory(l);
      D.row(l).head(out.p) = t.states[k].transpose();
      D.row(l).tail(out.q) = t.inputs[k].transpose();
      X.col(l) = t.states[k + 1];
    }
    out.D.push_back(std::move(D));
    out.Xnext.push_back(std::move(X));
  }
  return out;
}

TrajectoryDataset disassemble_stacked(const StackedData& data) {
  std::vector<Trajectory> trajectories(data.L);
  for (int l = 0; l < data.L; ++l) {
    auto& t = trajectories[l];
    t.states.resize(data.N + 1);
    t.inputs.resize(data.N);
    for (int k = 0; k < data.N; ++k) {
      t.states[k] = data.D[k].row(l).head(data.p).transpose();
      t.inputs[k] = data.D[k].row(l).tail(data.q).transpose();
    }
    t.states[data.N] = data.Xnext[data.N - 1].col(l);
  }
  return TrajectoryDataset(data.p, data.q, data.N, std::move(trajectories));
}

LtvModel::LtvModel(int p, int q, int N, std::vector<Matrix> C)
    : p_(p), q_(q), N_(N), C_(std::move(C)) {
  if (p < 1 || q < 0 || N < 1) throw DimensionError("invalid model dimensions");
  if (static_cast<int>(C_.size()) != N) {
    throw DimensionError("model must hold exactly N blocks");
  }
  for (int k = 0; k < N; ++k) {
    if (C_[k].rows() != p + q || C_[k].cols() != p) {
      std::ostringstream os;
      os << "model block " << k << " is " << C_[k].rows() << "x" << C_[k].cols()
         << ", expected " << p + q << "x" << p;
      throw DimensionError(os.str());
    }
  }
}

LtvModel LtvModel::zeros(int p, int q, int N) {
  return LtvModel(p, q, N, std::vector<Matrix>(N, Matrix::Zero(p + q, p)));
}

LtvModel LtvModel::from_ab(const std::vector<Matrix>& A, const std::vector<Matrix>& B) {
  if (A.empty() || A.size() != B.size()) {
    throw DimensionError("A and B sequences must be non-empty and of equal length");
  }
  const int p = static_cast<int>(A[0].rows());
  const int q = static_cast<int>(B[0].cols());
  std::vector<Matrix> C;
  C.reserve(A.size());
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A[k].rows() != p || A[k].cols() != p || B[k].rows() != p || B[k].cols() != q) {
      throw DimensionError("A/B shape mismatch at instant " + std::to_string(k));
    }
    Matrix c(p + q, p);
    c.topRows(p) = A[k].transpose();
    c.bottomRows(q) = B[k].transpose();
    C.push_back(std::move(c));
  }
  return LtvModel(p, q, static_cast<int>(A.size()), std::move(C));
}

Matrix LtvModel::A(int k) const { return C_.at(k).topRows(p_).transpose(); }

Matrix LtvModel::B(int k) const { return C_.at(k).bottomRows(q_).transpose(); }

double LtvModel::norm() const { return frobenius(C_); }

LambdaSchedule LambdaSchedule::scalar(double value) {
  require_positive_finite(value, "lambda");
  return LambdaSchedule(Scalar{value});
}

LambdaSchedule LambdaSchedule::zoned(std::vector<std::pair<int, double>> zones) {
  if (zones.empty()) throw InvalidArgument("zoned schedule needs at least one breakpoint");
  if (zones.front().first != 1) throw InvalidArgument("first zone must start at instant 1");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    require_positive_finite(zones[i].second, "zone lambda");
    if (i > 0 && zones[i].first <= zones[i - 1].first) {
      throw InvalidArgument("zone breakpoints must be strictly increasing");
    }
  }
  return LambdaSchedule(Zoned{std::move(zones)});
}

LambdaSchedule LambdaSchedule::per_instant(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("per-instant schedule is empty");
  for (double v : values) require_positive_finite(v, "lambda");
  return LambdaSchedule(PerInstant{std::move(values)});
}

std::vector<double> LambdaSchedule::materialize(int N) const {
  if (N < 2) throw DimensionError("schedules need N >= 2");
  const auto len = static_cast<std::size_t>(N - 1);
  if (const auto* s = std::get_if<Scalar>(&variant_)) {
    return std::vector<double>(len, s->value);
  }
  if (const auto* z = std::get_if<Zoned>(&variant_)) {
    std::vector<double> out(len);
    std::size_t zone = 0;
    for (int k = 1; k <= N - 1; ++k) {
      while (zone + 1 < z->zones.size() && z->zones[zone + 1].first <= k) ++zone;
      out[k - 1] = z->zones[zone].second;
    }
    return out;
  }
  const auto& v = std::get<PerInstant>(variant_).values;
  if (v.size() != len) {
    std::ostringstream os;
    os << "per-instant schedule has " << v.size() << " weights, expected " << len;
    throw DimensionError(os.str());
  }
  return v;
}

LambdaSchedule LambdaSchedule::scaled(double factor) const {
  require_positive_finite(factor, "scale factor");
  if (const auto* s = std::get_if<Scalar>(&variant_)) return scalar(s->value * factor);
  if (const auto* z = std::get_if<Zoned>(&variant_)) {
    auto zones = z->zones;
    for (auto& [k, v] : zones) v *= factor;
    return zoned(std::move(zones));
  }
  auto values = std::get<PerInstant>(variant_).values;
  for (auto& v : values) v *= factor;
  return per_instant(std::move(values));
}

namespace detail {

void check_model_data(const LtvModel& model, const StackedData& data) {
  if (model.p() != data.p || model.q() != data.q || model.N() != data.N) {
    throw DimensionError("model and data shapes differ");
  }
  if (static_cast<int>(data.D.size()) != data.N || static_cast<int>(data.Xnext.size()) != data.N) {
    throw DimensionError("stacked data must hold N blocks");
  }
}

std::vector<double> padded_lambdas(const LambdaSchedule& sched, int N) {
  const auto lam = sched.materialize(N);
  std::vector<double> out(N + 1, 0.0);
  for (int k = 1; k <= N - 1; ++k) out[k] = lam[k - 1];
  return out;
}

}  // namespace detail

CostTerms cost_terms(const LtvModel& model, const StackedData& data,
                     const LambdaSchedule& sched) {
  detail::check_model_data(model, data);
  const auto lam = detail::padded_lambdas(sched, data.N);
  CostTerms terms;
  for (int k = 0; k < data.N; ++k) {
    terms.fit += (data.D[k] * model.C(k) - data.Xnext[k].transpose()).squaredNorm();
  }
  for (int k = 1; k < data.N; ++k) {
    terms.smoothness += lam[k] * (model.C(k) - model.C(k - 1)).squaredNorm();
  }
  terms.fit *= 0.5;
  terms.smoothness *= 0.5;
  return terms;
}

double cost(const LtvModel& model, const StackedData& data, const LambdaSchedule& sched) {
  return cost_terms(model, data, sched).total();
}

std::vector<Matrix> gradient(const LtvModel& model, const StackedData& data,
                             const LambdaSchedule& sched) {
  detail::check_model_data(model, data);
  const auto lam = detail::padded_lambdas(sched, data.N);
  const int N = data.N;
  std::vector<Matrix> g(N);
  for (int k = 0; k < N; ++k) {
    g[k] = data.D[k].transpose() * (data.D[k] * model.C(k) - data.Xnext[k].transpose());
    if (k > 0) g[k] += lam[k] * (model.C(k) - model.C(k - 1));
    if (k < N - 1) g[k] += lam[k + 1] * (model.C(k) - model.C(k + 1));
  }
  return g;
}

double frobenius(const std::vector<Matrix>& blocks) {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return std::sqrt(s);
}

}  // namespace cosmic
