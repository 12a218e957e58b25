#pragma once

// Domain types for interdiction instances: leader/follower polytopes, the
// polyhedral cost support, training data sets and the ambiguity configuration,
// plus the validation probes behind them.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dri/io.hpp"
#include "dri/model.hpp"
#include "dri/solve.hpp"

namespace dri {

constexpr double kTolFeas = 1e-9;  // samples may sit on the support boundary

enum class NormOrder { L1, LInf };

inline NormOrder dual_order(NormOrder p) { return p == NormOrder::L1 ? NormOrder::LInf : NormOrder::L1; }

// Support set S = {c : B c <= b}. Interval supports keep (lo, hi) alongside
// the expanded rows; every reformulation consumes only (B, b).
struct PolyhedralSupport {
  Matrix B;
  Vector b;
  std::optional<std::pair<Vector, Vector>> interval_bounds;  // (lo, hi)

  static PolyhedralSupport from_intervals(const Vector& lo, const Vector& hi) {
    const int n = static_cast<int>(lo.size());
    if (hi.size() != n) throw std::invalid_argument("interval bounds size mismatch");
    for (int i = 0; i < n; ++i)
      if (lo[i] > hi[i]) throw std::invalid_argument("interval support has lo > hi");
    PolyhedralSupport s;
    s.B = Matrix::Zero(2 * n, n);
    s.b = Vector(2 * n);
    for (int i = 0; i < n; ++i) {
      s.B(i, i) = 1.0;
      s.b[i] = hi[i];
      s.B(n + i, i) = -1.0;
      s.b[n + i] = -lo[i];
    }
    s.interval_bounds = std::make_pair(lo, hi);
    return s;
  }

  int dim() const { return static_cast<int>(B.cols()); }
  int num_rows() const { return static_cast<int>(B.rows()); }
};

// Delta^(k) = b - B c, the per-sample support slack.
inline Vector slack_delta(const PolyhedralSupport& sup, const Vector& c) {
  if (c.size() != sup.dim()) throw std::invalid_argument("slack_delta: dimension mismatch");
  return sup.b - sup.B * c;
}

enum class DataOwner { Leader, Follower };

struct SampleSet {
  Matrix samples;  // k x n
  DataOwner owner = DataOwner::Leader;

  int count() const { return static_cast<int>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }
  Vector row(int k) const { return samples.row(k).transpose(); }
  Vector mean() const { return samples.colwise().mean().transpose(); }
};

struct DroConfig {
  double alpha_l = 0.0;
  double alpha_f = 0.0;
  double eps_l = 0.0;
  double eps_f = 0.0;
  NormOrder p = NormOrder::L1;

  NormOrder q() const { return dual_order(p); }
  void check() const {
    if (!(alpha_l >= 0.0 && alpha_l < 1.0) || !(alpha_f >= 0.0 && alpha_f < 1.0))
      throw std::invalid_argument("confidence level must lie in [0,1)");
    if (eps_l < 0.0 || eps_f < 0.0) throw std::invalid_argument("Wasserstein radius must be >= 0");
  }
};

// eps = delta / sqrt(k).
inline double wasserstein_radius(double delta, int k) {
  if (delta < 0.0) throw std::invalid_argument("radius scale must be >= 0");
  if (k < 1) throw std::invalid_argument("sample count must be >= 1");
  return delta / std::sqrt(static_cast<double>(k));
}

struct PackingForm {
  Matrix Ftilde;  // d~_f x n
  Vector ftilde;
  Vector U;  // diagonal of the interdiction bound matrix
};

// min_x max_y c'y over X = {x binary : Hx <= h}, Y(x) = {y >= 0 : Fy + Lx <= f}.
struct InterdictionInstance {
  int n = 0;  // follower variables
  int m = 0;  // leader variables
  Matrix H;
  Vector h;
  Matrix F;  // d_f x n
  Matrix L;  // d_f x m
  Vector f;
  std::optional<PackingForm> packing_form;

  static InterdictionInstance packing(const Matrix& H, const Vector& h, const Matrix& Ftilde,
                                      const Vector& ftilde, const Vector& U) {
    InterdictionInstance inst;
    inst.n = static_cast<int>(Ftilde.cols());
    inst.m = static_cast<int>(H.cols());
    inst.H = H;
    inst.h = h;
    const int dt = static_cast<int>(Ftilde.rows());
    inst.F = Matrix::Zero(dt + inst.n, inst.n);
    inst.F.topRows(dt) = Ftilde;
    inst.F.bottomRows(inst.n) = Matrix::Identity(inst.n, inst.n);
    inst.L = Matrix::Zero(dt + inst.n, inst.m);
    for (int i = 0; i < inst.n && i < inst.m; ++i) inst.L(dt + i, i) = U[i];
    inst.f = Vector(dt + inst.n);
    inst.f.head(dt) = ftilde;
    inst.f.tail(inst.n) = U;
    inst.packing_form = PackingForm{Ftilde, ftilde, U};
    return inst;
  }

  int d_f() const { return static_cast<int>(F.rows()); }
  int d_l() const { return static_cast<int>(H.rows()); }
};

// Re-detect the packing decomposition from the expanded (F, L, f).
inline std::optional<PackingForm> detect_packing(const InterdictionInstance& inst) {
  const int n = inst.n;
  if (inst.m != n || inst.d_f() < n) return std::nullopt;
  const int dt = inst.d_f() - n;
  for (int i = 0; i < dt; ++i)
    for (int j = 0; j < inst.m; ++j)
      if (inst.L(i, j) != 0.0) return std::nullopt;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (inst.F(dt + i, j) != (i == j ? 1.0 : 0.0)) return std::nullopt;
      if (i != j && inst.L(dt + i, j) != 0.0) return std::nullopt;
    }
  PackingForm pf;
  pf.Ftilde = inst.F.topRows(dt);
  pf.ftilde = inst.f.head(dt);
  pf.U = Vector(n);
  for (int i = 0; i < n; ++i) {
    pf.U[i] = inst.L(dt + i, i);
    if (pf.U[i] < 0.0 || inst.f[dt + i] != pf.U[i]) return std::nullopt;
  }
  return pf;
}

struct ValidationReport {
  struct Violation {
    std::string code;
    std::string message;
  };
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string code, std::string message) {
    violations.push_back({std::move(code), std::move(message)});
  }
  bool has(const std::string& code) const {
    for (const auto& v : violations)
      if (v.code == code) return true;
    return false;
  }
};

namespace detail_probe {

// Bounded <=> recession cone {d in cone_sign : A d <= 0} is trivial.
// Directions are boxed to [-1,1] so the probes themselves stay bounded.
inline bool cone_has_ray(const Matrix& A, bool nonneg, const Vector& goal) {
  MilpModel m;
  const int n = static_cast<int>(A.cols());
  for (int j = 0; j < n; ++j)
    m.add_var("d" + std::to_string(j), nonneg ? 0.0 : -1.0, 1.0, VarKind::Continuous, -goal[j]);
  for (int i = 0; i < A.rows(); ++i) {
    LinearTerms t;
    for (int j = 0; j < n; ++j) t.add(j, A(i, j));
    m.add_row("cone" + std::to_string(i), std::move(t), Relation::LessEqual, 0.0);
  }
  auto s = solve(m);
  return s.status == SolveStatus::Optimal && -s.objective > 1e-7;
}

inline bool polytope_feasible(const Matrix& A, const Vector& rhs, bool nonneg) {
  MilpModel m;
  const int n = static_cast<int>(A.cols());
  for (int j = 0; j < n; ++j)
    m.add_var("v" + std::to_string(j), nonneg ? 0.0 : -kInf, kInf, VarKind::Continuous, 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    LinearTerms t;
    for (int j = 0; j < n; ++j) t.add(j, A(i, j));
    m.add_row("r" + std::to_string(i), std::move(t), Relation::LessEqual, rhs[i]);
  }
  return solve(m).status == SolveStatus::Optimal;
}

}  // namespace detail_probe

// Coordinate range of S, via 2n LPs (max/min c_i). Throws if S is empty or a
// coordinate is unbounded.
inline std::pair<Vector, Vector> support_coordinate_range(const PolyhedralSupport& sup) {
  if (sup.interval_bounds) return {sup.interval_bounds->first, sup.interval_bounds->second};
  const int n = sup.dim();
  Vector lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    for (int dir = 0; dir < 2; ++dir) {
      MilpModel m;
      m.sense = dir == 0 ? Sense::Maximize : Sense::Minimize;
      for (int j = 0; j < n; ++j)
        m.add_var("c" + std::to_string(j), -kInf, kInf, VarKind::Continuous, j == i ? 1.0 : 0.0);
      for (int r = 0; r < sup.num_rows(); ++r) {
        LinearTerms t;
        for (int j = 0; j < n; ++j) t.add(j, sup.B(r, j));
        m.add_row("s" + std::to_string(r), std::move(t), Relation::LessEqual, sup.b[r]);
      }
      auto s = solve(m);
      if (s.status != SolveStatus::Optimal)
        throw std::runtime_error("support coordinate probe failed: S empty or unbounded");
      (dir == 0 ? hi : lo)[i] = s.objective;
    }
  }
  return {lo, hi};
}

inline ValidationReport validate_instance(const InterdictionInstance& inst,
                                          const PolyhedralSupport& sup) {
  if (inst.H.rows() != inst.h.size() || inst.H.cols() != inst.m || inst.F.rows() != inst.f.size() ||
      inst.F.cols() != inst.n || inst.L.rows() != inst.F.rows() || inst.L.cols() != inst.m ||
      sup.dim() != inst.n || sup.b.size() != sup.num_rows())
    throw std::invalid_argument("validate_instance: dimension mismatch");
  ValidationReport rep;

  // Assumption A2: S non-empty and bounded.
  if (!detail_probe::polytope_feasible(sup.B, sup.b, false)) {
    rep.add("support_empty", "support set S is empty");
  } else if (detail_probe::cone_has_ray(sup.B, false, Vector::Ones(sup.dim()))) {
    rep.add("support_unbounded", "support set S is unbounded");
  }

  // Assumption A1 (leader): X non-empty; x = 0 certifies it when h >= 0.
  bool x_nonempty = (inst.h.array() >= 0.0).all();
  if (!x_nonempty) {
    MilpModel m;
    for (int j = 0; j < inst.m; ++j)
      m.add_var("x" + std::to_string(j), 0, 1, VarKind::Binary, 0.0);
    for (int i = 0; i < inst.d_l(); ++i) {
      LinearTerms t;
      for (int j = 0; j < inst.m; ++j) t.add(j, inst.H(i, j));
      m.add_row("H" + std::to_string(i), std::move(t), Relation::LessEqual, inst.h[i]);
    }
    x_nonempty = solve(m).status == SolveStatus::Optimal;
  }
  if (!x_nonempty) rep.add("leader_polytope_empty", "X is empty");

  // Assumption A1 (follower): Y(x) bounded for all x (recession cone is
  // x-independent) and non-empty for every x in X.
  if (detail_probe::cone_has_ray(inst.F, true, Vector::Ones(inst.n)))
    rep.add("follower_unbounded", "Y(x) unbounded");
  if (!detail_probe::polytope_feasible(inst.F, inst.f, true)) {
    rep.add("follower_polytope_empty", "follower polytope empty");
  } else if (x_nonempty) {
    // y = 0 works for every x iff f_j >= max_{x in X} (Lx)_j row-wise; check
    // the cheap upper bound sum of positive L entries first, then fall back to
    // per-x enumeration on small leader dimensions.
    bool all_covered = true;
    for (int i = 0; i < inst.d_f(); ++i) {
      double worst = 0.0;
      for (int j = 0; j < inst.m; ++j) worst += std::max(inst.L(i, j), 0.0);
      if (worst > inst.f[i] + kTolFeas) all_covered = false;
    }
    if (!all_covered && inst.m <= 20) {
      for (long mask = 0; mask < (1L << inst.m); ++mask) {
        Vector x(inst.m);
        for (int j = 0; j < inst.m; ++j) x[j] = (mask >> j) & 1 ? 1.0 : 0.0;
        if (((inst.H * x - inst.h).array() > kTolFeas).any()) continue;
        if (!detail_probe::polytope_feasible(inst.F, inst.f - inst.L * x, true)) {
          rep.add("follower_polytope_empty", "Y(x) empty for some x in X");
          break;
        }
      }
    }
  }
  return rep;
}

inline void check_samples_in_support(const SampleSet& data, const PolyhedralSupport& sup,
                                     ValidationReport& rep) {
  for (int k = 0; k < data.count(); ++k) {
    const Vector d = slack_delta(sup, data.row(k));
    if ((d.array() < -kTolFeas).any()) {
      rep.add("sample_outside_support", "sample " + std::to_string(k) + " violates B c <= b");
    }
  }
}

// ---- JSON instance format ------------------------------------------------
// {n, m, H, h, Ftilde|F, L, f, U, support:{lo,hi}|{B,b}}, row-major matrices.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j.at(i).size()) != cols) throw std::runtime_error("ragged matrix in JSON");
    for (int k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

inline Vector vector_from_json(const nlohmann::json& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

inline nlohmann::json support_to_json(const PolyhedralSupport& s) {
  nlohmann::json j;
  if (s.interval_bounds) {
    j["lo"] = vector_to_json(s.interval_bounds->first);
    j["hi"] = vector_to_json(s.interval_bounds->second);
  } else {
    j["B"] = matrix_to_json(s.B);
    j["b"] = vector_to_json(s.b);
  }
  return j;
}

inline PolyhedralSupport support_from_json(const nlohmann::json& j) {
  if (j.contains("lo"))
    return PolyhedralSupport::from_intervals(vector_from_json(j.at("lo")),
                                             vector_from_json(j.at("hi")));
  PolyhedralSupport s;
  s.B = matrix_from_json(j.at("B"));
  s.b = vector_from_json(j.at("b"));
  return s;
}

inline nlohmann::json instance_to_json(const InterdictionInstance& inst,
                                       const PolyhedralSupport& sup) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["m"] = inst.m;
  j["H"] = matrix_to_json(inst.H);
  j["h"] = vector_to_json(inst.h);
  if (inst.packing_form) {
    j["Ftilde"] = matrix_to_json(inst.packing_form->Ftilde);
    j["ftilde"] = vector_to_json(inst.packing_form->ftilde);
    j["U"] = vector_to_json(inst.packing_form->U);
  } else {
    j["F"] = matrix_to_json(inst.F);
    j["L"] = matrix_to_json(inst.L);
    j["f"] = vector_to_json(inst.f);
  }
  j["support"] = support_to_json(sup);
  return j;
}

inline std::pair<InterdictionInstance, PolyhedralSupport> instance_from_json(
    const nlohmann::json& j) {
  InterdictionInstance inst;
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  const Matrix H = matrix_from_json(j.at("H"));
  const Vector h = vector_from_json(j.at("h"));
  if (j.contains("Ftilde")) {
    const Matrix Ft = matrix_from_json(j.at("Ftilde"));
    const Vector ft = vector_from_json(j.at("ftilde"));
    Vector U = j.contains("U") ? vector_from_json(j.at("U")) : Vector::Ones(n);
    inst = InterdictionInstance::packing(H, h, Ft, ft, U);
    // If the expanded blocks are also present they must match bit-exactly.
    if (j.contains("F")) {
      const Matrix F = matrix_from_json(j.at("F"));
      if (F.rows() != inst.F.rows() || F != inst.F)
        throw std::runtime_error("packing form does not match expanded F");
    }
  } else {
    inst.n = n;
    inst.m = m;
    inst.H = H;
    inst.h = h;
    inst.F = matrix_from_json(j.at("F"));
    inst.L = matrix_from_json(j.at("L"));
    inst.f = vector_from_json(j.at("f"));
    inst.packing_form = detect_packing(inst);
  }
  if (inst.n != n || inst.m != m) throw std::runtime_error("instance dimensions inconsistent");
  return {inst, support_from_json(j.at("support"))};
}

}  // namespace dri
