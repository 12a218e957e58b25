#pragma once

// Solver-agnostic LP/MILP container. Model builders target this interface
// only; the engine behind dri::solve() can be swapped without touching them.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dri/io.hpp"

namespace dri {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearTerms {
  // Sparse row: (variable id, coefficient), ids strictly increasing.
  std::vector<std::pair<int, double>> terms;

  void add(int var, double coef) {
    if (coef == 0.0) return;
    if (!terms.empty() && terms.back().first == var) {
      terms.back().second += coef;
      return;
    }
    terms.emplace_back(var, coef);
  }
};

class MilpModel {
 public:
  struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    VarKind kind = VarKind::Continuous;
    double obj = 0.0;
  };
  struct Constraint {
    std::string name;
    std::vector<std::pair<int, double>> terms;
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
  };

  Sense sense = Sense::Minimize;
  double obj_constant = 0.0;

  int add_var(const std::string& name, double lb, double ub, VarKind kind, double obj = 0.0) {
    if (kind == VarKind::Binary && (lb < 0.0 || ub > 1.0))
      throw std::invalid_argument("binary variable '" + name + "' must have bounds within [0,1]");
    if (index_.count(name)) throw std::invalid_argument("duplicate variable '" + name + "'");
    vars_.push_back({name, lb, ub, kind, obj});
    index_.emplace(name, static_cast<int>(vars_.size()) - 1);
    return static_cast<int>(vars_.size()) - 1;
  }

  void set_obj(int var, double coef) { vars_.at(var).obj = coef; }
  void add_obj(int var, double coef) { vars_.at(var).obj += coef; }
  void set_bounds(int var, double lb, double ub) {
    vars_.at(var).lb = lb;
    vars_.at(var).ub = ub;
  }

  int add_row(const std::string& name, LinearTerms lhs, Relation rel, double rhs) {
    normalize(lhs.terms);
    for (auto& [v, c] : lhs.terms)
      if (v < 0 || v >= static_cast<int>(vars_.size()))
        throw std::invalid_argument("row '" + name + "' references undeclared variable");
    rows_.push_back({name, std::move(lhs.terms), rel, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  int var(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no variable '" + name + "'");
    return it->second;
  }
  bool has_var(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Constraint>& rows() const { return rows_; }
  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const {
    int b = 0;
    for (const auto& v : vars_)
      if (v.kind == VarKind::Binary) ++b;
    return b;
  }

  // Deterministic textual form; rebuilding the same model must reproduce it
  // byte for byte (golden tests depend on this).
  std::string serialize() const {
    std::string out;
    out += sense == Sense::Minimize ? "min" : "max";
    out += " const=" + render_double(obj_constant) + "\n";
    for (const auto& v : vars_) {
      out += "var " + v.name + " [" + bound_str(v.lb) + "," + bound_str(v.ub) + "] ";
      out += v.kind == VarKind::Binary ? "bin" : "cont";
      out += " obj=" + render_double(v.obj) + "\n";
    }
    for (const auto& r : rows_) {
      out += "row " + r.name + ":";
      for (auto& [v, c] : r.terms) out += " " + render_double(c) + "*" + vars_[v].name;
      out += r.rel == Relation::LessEqual ? " <= " : (r.rel == Relation::Equal ? " == " : " >= ");
      out += render_double(r.rhs) + "\n";
    }
    return out;
  }

  // Standard LP text format, for external debugging.
  std::string to_lp_format() const {
    std::string out = sense == Sense::Minimize ? "Minimize\n obj:" : "Maximize\n obj:";
    bool any = false;
    for (const auto& v : vars_)
      if (v.obj != 0.0) {
        out += lp_term(v.obj, v.name, !any);
        any = true;
      }
    if (!any) out += vars_.empty() ? std::string(" 0") : (" 0 " + vars_[0].name);
    out += "\nSubject To\n";
    for (const auto& r : rows_) {
      out += " " + r.name + ":";
      bool first = true;
      for (auto& [v, c] : r.terms) {
        out += lp_term(c, vars_[v].name, first);
        first = false;
      }
      if (first) out += " 0 " + vars_[0].name;
      out += r.rel == Relation::LessEqual ? " <= " : (r.rel == Relation::Equal ? " = " : " >= ");
      out += render_double(r.rhs) + "\n";
    }
    out += "Bounds\n";
    for (const auto& v : vars_) {
      out += " " + (v.lb == -kInf ? "-inf" : render_double(v.lb)) + " <= " + v.name + " <= " +
             (v.ub == kInf ? "+inf" : render_double(v.ub)) + "\n";
    }
    std::string bins;
    for (const auto& v : vars_)
      if (v.kind == VarKind::Binary) bins += " " + v.name + "\n";
    if (!bins.empty()) out += "Binaries\n" + bins;
    out += "End\n";
    return out;
  }

 private:
  static void normalize(std::vector<std::pair<int, double>>& t) {
    std::map<int, double> acc;
    for (auto& [v, c] : t) acc[v] += c;
    t.clear();
    for (auto& [v, c] : acc)
      if (c != 0.0) t.emplace_back(v, c);
  }
  static std::string bound_str(double b) {
    if (b == kInf) return "inf";
    if (b == -kInf) return "-inf";
    return render_double(b);
  }
  static std::string lp_term(double c, const std::string& name, bool first) {
    std::string s;
    if (c < 0)
      s += first ? " -" : " - ";
    else
      s += first ? " " : " + ";
    s += render_double(std::abs(c)) + " " + name;
    return s;
  }

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::unordered_map<std::string, int> index_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, TimeLimit, Error };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::TimeLimit: return "time_limit";
    default: return "error";
  }
}

struct Solution {
  SolveStatus status = SolveStatus::Error;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> primal;  // by variable id; empty unless an incumbent exists
  double wall_s = 0.0;
  std::optional<double> mip_gap;
  std::string message;
  long nodes = 0;  // branch-and-bound nodes (0 for pure LPs)

  bool has_point() const { return !primal.empty(); }
  double value(const MilpModel& m, const std::string& name) const { return primal.at(m.var(name)); }
};

// McCormick rows for p = (1-x)*beta with x binary and beta in [0, M]:
//   0 <= p <= beta,  p <= M(1-x),  p >= beta - Mx.
// Exact at x in {0,1} whenever M is a valid upper bound on beta.
inline void add_mccormick(MilpModel& m, int p, int beta, int x, double big_m,
                          const std::string& tag) {
  if (!(big_m > 0.0)) throw std::invalid_argument("add_mccormick: M must be positive");
  LinearTerms t1;
  t1.add(p, 1.0);
  t1.add(beta, -1.0);
  m.add_row(tag + "_le_beta", std::move(t1), Relation::LessEqual, 0.0);
  LinearTerms t2;
  t2.add(p, 1.0);
  t2.add(x, big_m);
  m.add_row(tag + "_le_M1mx", std::move(t2), Relation::LessEqual, big_m);
  LinearTerms t3;
  t3.add(p, 1.0);
  t3.add(beta, -1.0);
  t3.add(x, big_m);
  m.add_row(tag + "_ge_bMx", std::move(t3), Relation::GreaterEqual, 0.0);
}

}  // namespace dri
