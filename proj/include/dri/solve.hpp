#pragma once

// Backend entry point: converts a MilpModel to computational form, solves the
// LP relaxation with the interior-point core and runs branch-and-bound over
// the binaries. Infeasibility is certified with an elastic LP and
// unboundedness with a recession-ray LP, so ambiguous IPM exits never leak
// into reported statuses.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <stdexcept>
#include <vector>

#include "dri/model.hpp"
#include "dri/solver/ipm.hpp"

namespace dri {

struct SolveOptions {
  double time_limit = 3600.0;  // seconds
  double rel_gap = 1e-6;
  double abs_feas_tol = 1e-7;
  bool lex_tiebreak = false;   // refine to the lex-smallest optimal binary vector
  int max_nodes = 2'000'000;
};

namespace detail {

struct Converted {
  lp::Problem prob;
  int n_struct = 0;
  std::vector<int> binaries;  // structural column ids
  bool maximize = false;
  lp::Vec colscale;  // original value = scaled value * colscale
};

// Geometric-mean equilibration with power-of-2 factors (bit-exact across
// runs). Binary columns keep scale 1 so integrality logic stays untouched;
// column scaling leaves objective values unchanged (c_j scales, x_j unscales).
inline void equilibrate(lp::Problem& p, const std::vector<bool>& keep_unit, lp::Vec& colscale) {
  const int m = p.rows(), n = p.cols();
  colscale = lp::Vec::Ones(n);
  for (int pass = 0; pass < 3; ++pass) {
    lp::Vec rmax = lp::Vec::Zero(m), rmin = lp::Vec::Constant(m, 1e300);
    for (int k = 0; k < p.A.outerSize(); ++k)
      for (lp::SpMat::InnerIterator it(p.A, k); it; ++it) {
        const double a = std::abs(it.value());
        if (a == 0.0) continue;
        rmax[it.row()] = std::max(rmax[it.row()], a);
        rmin[it.row()] = std::min(rmin[it.row()], a);
      }
    lp::Vec rs = lp::Vec::Ones(m);
    bool any = false;
    for (int i = 0; i < m; ++i) {
      if (rmax[i] == 0.0) continue;
      rs[i] = std::exp2(std::round(-0.5 * (std::log2(rmax[i]) + std::log2(rmin[i]))));
      if (rs[i] != 1.0) {
        any = true;
        p.b[i] *= rs[i];
      }
    }
    if (any)
      for (int k = 0; k < p.A.outerSize(); ++k)
        for (lp::SpMat::InnerIterator it(p.A, k); it; ++it) it.valueRef() *= rs[it.row()];

    lp::Vec cmax = lp::Vec::Zero(n), cmin = lp::Vec::Constant(n, 1e300);
    for (int k = 0; k < p.A.outerSize(); ++k)
      for (lp::SpMat::InnerIterator it(p.A, k); it; ++it) {
        const double a = std::abs(it.value());
        if (a == 0.0) continue;
        cmax[it.col()] = std::max(cmax[it.col()], a);
        cmin[it.col()] = std::min(cmin[it.col()], a);
      }
    bool anyc = false;
    for (int j = 0; j < n; ++j) {
      if (cmax[j] == 0.0 || keep_unit[j]) continue;
      // scaled variable is x/s; column entries and cost pick up the factor s
      const double s = std::exp2(std::round(-0.5 * (std::log2(cmax[j]) + std::log2(cmin[j]))));
      if (s == 1.0) continue;
      anyc = true;
      colscale[j] *= s;
      p.c[j] *= s;
      if (p.lb[j] > -lp::kInf) p.lb[j] /= s;
      if (p.ub[j] < lp::kInf) p.ub[j] /= s;
      for (lp::SpMat::InnerIterator it(p.A, j); it; ++it) it.valueRef() *= s;
    }
    if (!any && !anyc) break;
  }
}

inline Converted to_computational_form(const MilpModel& m) {
  Converted cv;
  cv.maximize = m.sense == Sense::Maximize;
  const int ns = m.num_vars();
  cv.n_struct = ns;
  int slacks = 0;
  for (const auto& r : m.rows())
    if (r.rel != Relation::Equal) ++slacks;
  const int n = ns + slacks;
  const int mr = m.num_rows();

  cv.prob.lb.resize(n);
  cv.prob.ub.resize(n);
  cv.prob.c = lp::Vec::Zero(n);
  cv.prob.b.resize(mr);
  cv.prob.c0 = cv.maximize ? -m.obj_constant : m.obj_constant;

  for (int j = 0; j < ns; ++j) {
    const auto& v = m.vars()[j];
    cv.prob.lb[j] = v.lb;
    cv.prob.ub[j] = v.ub;
    cv.prob.c[j] = cv.maximize ? -v.obj : v.obj;
    if (v.kind == VarKind::Binary) cv.binaries.push_back(j);
  }

  std::vector<Eigen::Triplet<double>> trips;
  int sc = ns;
  for (int i = 0; i < mr; ++i) {
    const auto& r = m.rows()[i];
    for (auto& [v, c] : r.terms) trips.emplace_back(i, v, c);
    cv.prob.b[i] = r.rhs;
    if (r.rel != Relation::Equal) {
      trips.emplace_back(i, sc, 1.0);
      cv.prob.lb[sc] = r.rel == Relation::LessEqual ? 0.0 : -lp::kInf;
      cv.prob.ub[sc] = r.rel == Relation::LessEqual ? lp::kInf : 0.0;
      ++sc;
    }
  }
  cv.prob.A.resize(mr, n);
  cv.prob.A.setFromTriplets(trips.begin(), trips.end());
  cv.prob.A.makeCompressed();
  std::vector<bool> keep_unit(n, false);
  for (int col : cv.binaries) keep_unit[col] = true;
  equilibrate(cv.prob, keep_unit, cv.colscale);
  return cv;
}

// Bound propagation over the equality form A x = b. Detects infeasibility,
// fixes variables in forcing rows (rows whose extreme activity equals the
// right-hand side) and resolves singleton rows. Fixing forced variables also
// removes empty-relative-interior degeneracy that stalls the interior-point
// iteration (e.g. McCormick rows once the binary is pinned).
enum class PropStatus { Ok, Infeasible };

inline PropStatus propagate_bounds(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                                   const lp::Vec& b, lp::Vec& lb, lp::Vec& ub) {
  using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  const int mr = static_cast<int>(A.rows());
  const double tol = 1e-9;
  auto pinned = [&](int j) {
    return std::isfinite(lb[j]) && std::isfinite(ub[j]) &&
           ub[j] - lb[j] <= 1e-12 * (1.0 + std::abs(lb[j]));
  };
  for (int pass = 0; pass < 8; ++pass) {
    bool changed = false;
    for (int j = 0; j < lb.size(); ++j)
      if (lb[j] > ub[j] + 1e-9 * (1.0 + std::abs(std::min(std::abs(lb[j]), std::abs(ub[j])))))
        return PropStatus::Infeasible;
    for (int i = 0; i < mr; ++i) {
      double lo = 0.0, hi = 0.0;
      int n_free = 0, last_free = -1;
      double last_coef = 0.0, fixed_sum = 0.0;
      for (RowMat::InnerIterator it(A, i); it; ++it) {
        const int j = static_cast<int>(it.col());
        const double a = it.value();
        if (pinned(j)) {
          fixed_sum += a * lb[j];
          lo += a * lb[j];
          hi += a * lb[j];
          continue;
        }
        ++n_free;
        last_free = j;
        last_coef = a;
        lo += a > 0 ? a * lb[j] : a * ub[j];
        hi += a > 0 ? a * ub[j] : a * lb[j];
      }
      const double scale = 1.0 + std::abs(b[i]);
      if (lo > b[i] + tol * scale || hi < b[i] - tol * scale) return PropStatus::Infeasible;
      if (n_free == 0) continue;
      if (n_free == 1) {
        const double v = (b[i] - fixed_sum) / last_coef;
        if (v < lb[last_free] - tol * scale || v > ub[last_free] + tol * scale)
          return PropStatus::Infeasible;
        lb[last_free] = ub[last_free] = std::clamp(v, lb[last_free], ub[last_free]);
        changed = true;
        continue;
      }
      if (std::isfinite(lo) && lo >= b[i] - tol * scale) {  // forcing at minimum activity
        for (RowMat::InnerIterator it(A, i); it; ++it) {
          const int j = static_cast<int>(it.col());
          if (pinned(j)) continue;
          if (it.value() > 0)
            ub[j] = lb[j];
          else
            lb[j] = ub[j];
        }
        changed = true;
      } else if (std::isfinite(hi) && hi <= b[i] + tol * scale) {  // forcing at maximum
        for (RowMat::InnerIterator it(A, i); it; ++it) {
          const int j = static_cast<int>(it.col());
          if (pinned(j)) continue;
          if (it.value() > 0)
            lb[j] = ub[j];
          else
            ub[j] = lb[j];
        }
        changed = true;
      }
    }
    if (!changed) break;
  }
  return PropStatus::Ok;
}

inline bool elastic_feasible(const lp::Problem& p, double tol, lp::Vec* point = nullptr) {
  lp::Problem e;
  const int n = p.cols(), mr = p.rows();
  e.lb.resize(n + 2 * mr);
  e.ub.resize(n + 2 * mr);
  e.c = lp::Vec::Zero(n + 2 * mr);
  e.b = p.b;
  e.lb.head(n) = p.lb;
  e.ub.head(n) = p.ub;
  for (int i = 0; i < 2 * mr; ++i) {
    e.lb[n + i] = 0.0;
    e.ub[n + i] = lp::kInf;
    e.c[n + i] = 1.0;
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < p.A.outerSize(); ++k)
    for (lp::SpMat::InnerIterator it(p.A, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < mr; ++i) {
    trips.emplace_back(i, n + 2 * i, 1.0);
    trips.emplace_back(i, n + 2 * i + 1, -1.0);
  }
  e.A.resize(mr, n + 2 * mr);
  e.A.setFromTriplets(trips.begin(), trips.end());
  e.A.makeCompressed();
  lp::IpmSolver s(e);
  auto r = s.solve();
  const double scale = 1.0 + p.b.lpNorm<Eigen::Infinity>();
  if (r.status != lp::LpStatus::Optimal) return r.status != lp::LpStatus::PrimalInfeasible;
  if (point && r.obj <= tol * scale) *point = r.x.head(n);
  return r.obj <= tol * scale;
}

// Exact-penalty composite: min c'x + rho * 1'(p+q) with Ax + p - q = b.
// Always has a strictly feasible interior, so it converges where the plain
// iteration stalls on empty-interior (degenerate but feasible) LPs. For rho
// larger than the dual norm the penalty mass vanishes and x is optimal.
inline bool penalty_solve(const lp::Problem& p, double feas_tol, double& obj, lp::Vec& x) {
  const int n = p.cols(), mr = p.rows();
  lp::Problem e;
  e.lb.resize(n + 2 * mr);
  e.ub.resize(n + 2 * mr);
  e.c = lp::Vec::Zero(n + 2 * mr);
  e.b = p.b;
  e.c0 = p.c0;
  e.lb.head(n) = p.lb;
  e.ub.head(n) = p.ub;
  e.c.head(n) = p.c;
  for (int i = 0; i < 2 * mr; ++i) {
    e.lb[n + i] = 0.0;
    e.ub[n + i] = lp::kInf;
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < p.A.outerSize(); ++k)
    for (lp::SpMat::InnerIterator it(p.A, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < mr; ++i) {
    trips.emplace_back(i, n + 2 * i, 1.0);
    trips.emplace_back(i, n + 2 * i + 1, -1.0);
  }
  e.A.resize(mr, n + 2 * mr);
  e.A.setFromTriplets(trips.begin(), trips.end());
  e.A.makeCompressed();
  const double cscale = 1.0 + p.c.lpNorm<Eigen::Infinity>();
  const double bscale = 1.0 + p.b.lpNorm<Eigen::Infinity>();
  lp::IpmSolver s(e);
  for (double rho : {1e4, 1e7, 1e10}) {
    for (int i = 0; i < 2 * mr; ++i) e.c[n + i] = rho * cscale;
    s.set_cost(e.c);
    auto r = s.solve();
    if (r.status != lp::LpStatus::Optimal) continue;
    const double mass = r.x.tail(2 * mr).sum();
    if (mass <= feas_tol * bscale) {
      x = r.x.head(n);
      obj = p.c.dot(x) + p.c0;
      return true;
    }
  }
  return false;
}

inline bool has_improving_ray(const lp::Problem& p, double tol) {
  lp::Problem r;
  const int n = p.cols(), mr = p.rows();
  r.A = p.A;
  r.b = lp::Vec::Zero(mr);
  r.c = p.c;
  r.lb.resize(n);
  r.ub.resize(n);
  for (int j = 0; j < n; ++j) {
    const bool lo = p.lb[j] > -lp::kInf, up = p.ub[j] < lp::kInf;
    if (lo && up) {
      r.lb[j] = r.ub[j] = 0.0;
    } else if (lo) {
      r.lb[j] = 0.0;
      r.ub[j] = 1.0;
    } else if (up) {
      r.lb[j] = -1.0;
      r.ub[j] = 0.0;
    } else {
      r.lb[j] = -1.0;
      r.ub[j] = 1.0;
    }
  }
  lp::IpmSolver s(r);
  auto res = s.solve();
  if (res.status != lp::LpStatus::Optimal) return false;
  const double scale = 1.0 + p.c.lpNorm<Eigen::Infinity>();
  return res.obj < -tol * scale;
}

struct NodeLpOutcome {
  enum Kind { Feasible, Infeasible, Failed } kind = Failed;
  double obj = 0.0;
  lp::Vec x;
};

class MilpDriver {
 public:
  MilpDriver(const MilpModel& model, const SolveOptions& opt)
      : model_(model), opt_(opt), cv_(to_computational_form(model)), solver_(cv_.prob) {
    lb0_ = cv_.prob.lb;
    ub0_ = cv_.prob.ub;
    A_rm_ = cv_.prob.A;
    start_ = std::chrono::steady_clock::now();
  }

  Solution run() {
    Solution sol;
    sol.status = SolveStatus::Error;

    // Root relaxation with status certification.
    auto root = solve_node({});
    if (root.kind == NodeLpOutcome::Infeasible) {
      sol.status = SolveStatus::Infeasible;
      sol.wall_s = elapsed();
      return sol;
    }
    if (root.kind == NodeLpOutcome::Failed) {
      set_bounds({});
      if (!elastic_feasible(solver_.problem(), opt_.abs_feas_tol)) {
        sol.status = SolveStatus::Infeasible;
      } else if (has_improving_ray(solver_.problem(), opt_.abs_feas_tol)) {
        sol.status = SolveStatus::Unbounded;
      } else {
        sol.status = SolveStatus::Error;
        sol.message = "LP did not converge";
      }
      sol.wall_s = elapsed();
      return sol;
    }

    if (branch_and_bound(root, sol)) {
      if (opt_.lex_tiebreak && !cv_.binaries.empty() && sol.status == SolveStatus::Optimal)
        lex_refine(sol);
    }
    sol.wall_s = elapsed();
    return sol;
  }

  // Feasibility-style query: is there an integral point with objective <=
  // target (internal min sense)? Exposed for the lexicographic refinement.
  bool reaches(double target, const std::vector<std::pair<int, int>>& fixes, lp::Vec* point) {
    auto out = solve_node(fixes);
    if (out.kind != NodeLpOutcome::Feasible) return false;
    if (out.obj > target) return false;
    Solution tmp;
    tmp.status = SolveStatus::Error;
    if (!branch_and_bound(out, tmp, fixes, target)) return false;
    if (!tmp.has_point() || internal_obj(tmp) > target) return false;
    if (point) {
      point->resize(cv_.n_struct);
      for (int j = 0; j < cv_.n_struct; ++j) (*point)[j] = tmp.primal[j];
    }
    return true;
  }

 private:
  using Fix = std::pair<int, int>;  // (binary column, value)

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool out_of_time() const { return elapsed() > opt_.time_limit; }

  void set_bounds(const std::vector<Fix>& fixes) {
    lp::Vec lb = lb0_, ub = ub0_;
    for (auto& [col, val] : fixes) {
      lb[col] = val;
      ub[col] = val;
    }
    solver_.set_bounds(lb, ub);
  }

  NodeLpOutcome solve_node(const std::vector<Fix>& fixes) {
    NodeLpOutcome out;
    lp::Vec lb = lb0_, ub = ub0_;
    for (auto& [col, val] : fixes) {
      lb[col] = val;
      ub[col] = val;
    }
    if (propagate_bounds(A_rm_, solver_.problem().b, lb, ub) == PropStatus::Infeasible) {
      out.kind = NodeLpOutcome::Infeasible;
      return out;
    }
    solver_.set_bounds(lb, ub);
    auto r = solver_.solve();
    if (r.status == lp::LpStatus::Optimal) {
      out.kind = NodeLpOutcome::Feasible;
      out.obj = r.obj;
      out.x = r.x;
      return out;
    }
    // Certify before reporting: IPM exit codes are heuristics. Likely-feasible
    // failures go through the exact penalty first, likely-infeasible ones
    // through the elastic feasibility problem.
    const bool hint_infeasible = r.status == lp::LpStatus::PrimalInfeasible;
    if (hint_infeasible && !elastic_feasible(solver_.problem(), opt_.abs_feas_tol)) {
      out.kind = NodeLpOutcome::Infeasible;
      return out;
    }
    double obj;
    lp::Vec x;
    if (penalty_solve(solver_.problem(), opt_.abs_feas_tol, obj, x)) {
      out.kind = NodeLpOutcome::Feasible;
      out.obj = obj;
      out.x = x;
      return out;
    }
    if (!hint_infeasible && !elastic_feasible(solver_.problem(), opt_.abs_feas_tol)) {
      out.kind = NodeLpOutcome::Infeasible;
      return out;
    }
    out.kind = NodeLpOutcome::Failed;
    return out;
  }

  int most_fractional(const lp::Vec& x) const {
    int best = -1;
    double bestd = 1e-6;
    for (int col : cv_.binaries) {
      const double f = std::abs(x[col] - std::round(x[col]));
      if (f > bestd) {
        bestd = f;
        best = col;
      }
    }
    return best;
  }

  // Returns false only on hard failure. Incumbent/bound reported through sol.
  bool branch_and_bound(const NodeLpOutcome& root, Solution& sol,
                        const std::vector<Fix>& base_fixes = {},
                        double target = -std::numeric_limits<double>::infinity()) {
    struct Node {
      double bound;
      int id;
      std::vector<Fix> fixes;
      bool operator<(const Node& o) const {
        if (bound != o.bound) return bound > o.bound;  // min-heap on bound
        return id > o.id;
      }
    };
    std::priority_queue<Node> open;
    int next_id = 0;
    double incumbent = std::numeric_limits<double>::infinity();
    lp::Vec inc_x;
    bool timed_out = false, hard_fail = false;

    auto push_children = [&](double bound, const std::vector<Fix>& fixes, int col, double xval) {
      Node nd{bound, next_id++, fixes};
      nd.fixes.emplace_back(col, xval > 0.5 ? 1 : 0);
      open.push(nd);
      Node nd2{bound, next_id++, fixes};
      nd2.fixes.emplace_back(col, xval > 0.5 ? 0 : 1);
      open.push(nd2);
    };

    // Integral-looking points are certified by re-solving with every binary
    // pinned; a 1e-6-fractional value whose rounding is actually infeasible
    // falls back to branching on it.
    auto consider = [&](const NodeLpOutcome& out, const std::vector<Fix>& fixes) {
      const int col = most_fractional(out.x);
      if (col >= 0) {
        push_children(out.obj, fixes, col, out.x[col]);
        return;
      }
      if (out.obj >= incumbent - 1e-12) return;  // cannot improve
      std::vector<Fix> leaf = fixes;
      std::vector<bool> already(cv_.prob.cols(), false);
      for (auto& [c, v] : fixes) already[c] = true;
      bool any_new = false;
      for (int bc : cv_.binaries)
        if (!already[bc]) {
          leaf.emplace_back(bc, out.x[bc] > 0.5 ? 1 : 0);
          any_new = true;
        }
      NodeLpOutcome cert = any_new ? solve_node(leaf) : out;
      if (cert.kind == NodeLpOutcome::Feasible) {
        if (cert.obj < incumbent) {
          incumbent = cert.obj;
          inc_x = cert.x;
        }
      } else if (cert.kind != NodeLpOutcome::Feasible && any_new) {
        // rounding infeasible or certification stuck: branch instead
        int worst = -1;
        double wf = -1.0;
        for (int bc : cv_.binaries)
          if (!already[bc]) {
            const double f = std::abs(out.x[bc] - std::round(out.x[bc]));
            if (f > wf) {
              wf = f;
              worst = bc;
            }
          }
        if (worst >= 0) push_children(out.obj, fixes, worst, out.x[worst]);
      } else if (cert.kind == NodeLpOutcome::Failed) {
        hard_fail = true;
      }
    };

    consider(root, base_fixes);

    double final_bound = root.obj;
    long nodes = 0;
    while (!open.empty() && !hard_fail) {
      if (out_of_time() || ++nodes > opt_.max_nodes) {
        timed_out = true;
        final_bound = open.top().bound;
        break;
      }
      Node nd = open.top();
      open.pop();
      const double cut =
          incumbent - std::max(1e-9, 0.5 * opt_.rel_gap * (1.0 + std::abs(incumbent)));
      if (nd.bound >= cut) {  // best-bound queue: remaining gap within tolerance
        final_bound = nd.bound;
        open = {};
        break;
      }
      if (incumbent <= target) break;
      if (nd.bound > target && !std::isinf(target)) continue;
      auto out = solve_node(nd.fixes);
      if (out.kind == NodeLpOutcome::Infeasible) continue;
      if (out.kind == NodeLpOutcome::Failed) {
        // Stubborn node LP: branch blindly on the first unfixed binary with
        // the parent bound. Fully-fixed leaves are propagated to a trivial
        // LP, so this terminates; a failure there is a genuine solver fault.
        std::vector<bool> already(cv_.prob.cols(), false);
        for (auto& [c, v] : nd.fixes) already[c] = true;
        int col = -1;
        for (int bc : cv_.binaries)
          if (!already[bc]) {
            col = bc;
            break;
          }
        if (col < 0) return fail(sol, "leaf LP failed");
        push_children(nd.bound, nd.fixes, col, 0.0);
        continue;
      }
      if (out.obj >= cut) continue;
      consider(out, nd.fixes);
    }
    if (hard_fail) return fail(sol, "leaf certification LP failed");
    sol.nodes += nodes;

    if (std::isfinite(incumbent)) {
      sol.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
      sol.primal.resize(cv_.n_struct);
      for (int j = 0; j < cv_.n_struct; ++j) sol.primal[j] = inc_x[j] * cv_.colscale[j];
      for (int col : cv_.binaries) sol.primal[col] = std::round(inc_x[col]);
      sol.objective = cv_.maximize ? -incumbent : incumbent;
      if (timed_out)
        sol.mip_gap = std::abs(incumbent - final_bound) / (1.0 + std::abs(incumbent));
      return true;
    }
    if (timed_out) {
      sol.status = SolveStatus::TimeLimit;
      return true;
    }
    sol.status = SolveStatus::Infeasible;  // every node pruned infeasible
    return true;
  }

  bool fail(Solution& sol, const char* msg) {
    sol.status = SolveStatus::Error;
    sol.message = msg;
    return false;
  }

  double internal_obj(const Solution& sol) const {
    return cv_.maximize ? -sol.objective : sol.objective;
  }

  // Lexicographic tie-breaking: smallest binary vector (in declaration order)
  // among optima. A witness point satisfying all accumulated fixes is carried
  // along so each pin stays attainable.
  void lex_refine(Solution& sol) {
    const double target = internal_obj(sol) + 1e-7 * (1.0 + std::abs(sol.objective));
    std::vector<Fix> fixes;
    lp::Vec witness(cv_.n_struct);
    for (int j = 0; j < cv_.n_struct; ++j) witness[j] = sol.primal[j];
    for (int col : cv_.binaries) {
      if (witness[col] < 0.5) {
        fixes.emplace_back(col, 0);
        continue;
      }
      fixes.emplace_back(col, 0);
      lp::Vec trial;
      if (reaches(target, fixes, &trial)) {
        witness = trial;
      } else {
        fixes.back().second = 1;
      }
      if (out_of_time()) break;
    }
    for (int j = 0; j < cv_.n_struct; ++j) sol.primal[j] = witness[j];
    for (int col : cv_.binaries) sol.primal[col] = std::round(witness[col]);
  }

  const MilpModel& model_;
  SolveOptions opt_;
  Converted cv_;
  lp::IpmSolver solver_;
  lp::Vec lb0_, ub0_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A_rm_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline Solution solve(const MilpModel& model, const SolveOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  Solution sol;
  try {
    detail::MilpDriver driver(model, opt);
    sol = driver.run();
  } catch (const std::exception& e) {
    sol.status = SolveStatus::Error;
    sol.message = e.what();
  }
  sol.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::TimeLimit)
    sol.primal.clear();
  return sol;
}

}  // namespace dri
