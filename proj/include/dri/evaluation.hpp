#pragma once

// Empirical CVaR estimation, full-information oracles, and the relative
// in-/out-of-sample loss measures used by the experiments.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dri/instance.hpp"
#include "dri/model.hpp"
#include "dri/reformulation.hpp"
#include "dri/solve.hpp"

namespace dri {

// Discrete right-tail CVaR (Rockafellar-Uryasev): the mean of the worst
// (1-alpha) fraction, with fractional weight on the boundary order statistic.
inline double cvar_right(std::vector<double> losses, double alpha) {
  if (losses.empty()) throw std::invalid_argument("cvar of an empty sample");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0,1)");
  std::sort(losses.begin(), losses.end(), std::greater<>());
  const double m = (1.0 - alpha) * static_cast<double>(losses.size());
  const int whole = static_cast<int>(std::floor(m));
  double acc = 0.0;
  for (int i = 0; i < whole; ++i) acc += losses[i];
  const double frac = m - whole;
  if (frac > 0.0) acc += frac * losses[whole];
  return acc / m;
}

inline double cvar_left(const std::vector<double>& profits, double alpha) {
  std::vector<double> neg(profits.size());
  for (std::size_t i = 0; i < profits.size(); ++i) neg[i] = -profits[i];
  return -cvar_right(std::move(neg), alpha);
}

inline std::vector<double> portfolio_values(const SampleSet& samples, const Vector& y) {
  std::vector<double> v(samples.count());
  for (int k = 0; k < samples.count(); ++k) v[k] = samples.row(k).dot(y);
  return v;
}

// rho_f(y) under the empirical distribution of eval samples.
inline double empirical_rho_f(const SampleSet& eval, const Vector& y, double alpha_f) {
  return cvar_left(portfolio_values(eval, y), alpha_f);
}
inline double empirical_rho_l(const SampleSet& eval, const Vector& y, double alpha_l) {
  return cvar_right(portfolio_values(eval, y), alpha_l);
}

// ---- SAA CVaR blocks (radius zero; used by the full-information problems) --

// At alpha = 0 the CVaR is the plain sample mean, so the block collapses to a
// linear expression in y; otherwise it is the usual epigraph formulation.

// follower (left tail, to maximize): t - (1/((1-a)N)) sum s, s >= t - c^(k).y
inline LinearTerms append_saa_follower_objective(MilpModel& m, const SampleSet& samples,
                                                 const std::vector<int>& y, double alpha,
                                                 const std::string& pre) {
  LinearTerms obj;
  const int N = samples.count();
  if (alpha == 0.0) {
    const Vector mean = samples.mean();
    for (std::size_t i = 0; i < y.size(); ++i) obj.add(y[i], mean[i]);
    return obj;
  }
  const int t = m.add_var(pre + "t_f", -kInf, kInf, VarKind::Continuous, 0.0);
  obj.add(t, 1.0);
  for (int k = 0; k < N; ++k) {
    const int s = m.add_var(pre + "s_f(" + std::to_string(k) + ")", 0.0, kInf,
                            VarKind::Continuous, 0.0);
    LinearTerms row;
    row.add(t, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) row.add(y[i], -samples.samples(k, i));
    row.add(s, -1.0);
    m.add_row(pre + "saa_f(" + std::to_string(k) + ")", std::move(row), Relation::LessEqual, 0.0);
    obj.add(s, -1.0 / ((1.0 - alpha) * N));
  }
  return obj;
}

// leader (right tail, to minimize): t + (1/((1-a)N)) sum s, s >= c^(k).y - t
inline LinearTerms append_saa_leader_objective(MilpModel& m, const SampleSet& samples,
                                               const std::vector<int>& y, double alpha,
                                               const std::string& pre) {
  LinearTerms obj;
  const int N = samples.count();
  if (alpha == 0.0) {
    const Vector mean = samples.mean();
    for (std::size_t i = 0; i < y.size(); ++i) obj.add(y[i], mean[i]);
    return obj;
  }
  const int t = m.add_var(pre + "t_l", -kInf, kInf, VarKind::Continuous, 0.0);
  obj.add(t, 1.0);
  for (int k = 0; k < N; ++k) {
    const int s = m.add_var(pre + "s_l(" + std::to_string(k) + ")", 0.0, kInf,
                            VarKind::Continuous, 0.0);
    LinearTerms row;
    for (std::size_t i = 0; i < y.size(); ++i) row.add(y[i], samples.samples(k, i));
    row.add(t, -1.0);
    row.add(s, -1.0);
    m.add_row(pre + "saa_l(" + std::to_string(k) + ")", std::move(row), Relation::LessEqual, 0.0);
    obj.add(s, 1.0 / ((1.0 - alpha) * N));
  }
  return obj;
}

// ---- true best responses -----------------------------------------------------

struct ResponseResult {
  Vector y;
  double value = std::numeric_limits<double>::quiet_NaN();
};

// max over Y(x) of the empirical left-tail CVaR (radius 0).
inline ResponseResult follower_true_best_response(const InterdictionInstance& inst,
                                                  const Vector& x, const SampleSet& eval_samples,
                                                  double alpha_f) {
  require_x_in_X(inst, x);
  MilpModel m;
  m.sense = Sense::Maximize;
  std::vector<int> y(inst.n);
  for (int i = 0; i < inst.n; ++i)
    y[i] = m.add_var("y(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  const Vector rhs = inst.f - inst.L * x;
  for (int j = 0; j < inst.d_f(); ++j) {
    LinearTerms row;
    for (int i = 0; i < inst.n; ++i) row.add(y[i], inst.F(j, i));
    m.add_row("Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs[j]);
  }
  auto obj = append_saa_follower_objective(m, eval_samples, y, alpha_f, "");
  for (auto& [v, c] : obj.terms) m.add_obj(v, c);
  auto s = solve(m);
  if (s.status != SolveStatus::Optimal)
    throw std::runtime_error("true best-response LP failed");
  ResponseResult r;
  r.value = s.objective;
  r.y.resize(inst.n);
  for (int i = 0; i < inst.n; ++i) r.y[i] = s.primal[y[i]];
  return r;
}

// Optimistic tie-break: among the follower's empirical best responses, the
// one minimizing the leader's empirical right-tail CVaR (two-stage LP).
inline ResponseResult optimistic_true_response(const InterdictionInstance& inst, const Vector& x,
                                               const SampleSet& eval_samples, double alpha_f,
                                               double alpha_l) {
  const auto stage1 = follower_true_best_response(inst, x, eval_samples, alpha_f);
  MilpModel m;
  m.sense = Sense::Minimize;
  std::vector<int> y(inst.n);
  for (int i = 0; i < inst.n; ++i)
    y[i] = m.add_var("y(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  const Vector rhs = inst.f - inst.L * x;
  for (int j = 0; j < inst.d_f(); ++j) {
    LinearTerms row;
    for (int i = 0; i < inst.n; ++i) row.add(y[i], inst.F(j, i));
    m.add_row("Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs[j]);
  }
  LinearTerms fopt = append_saa_follower_objective(m, eval_samples, y, alpha_f, "");
  m.add_row("follower_optimal", std::move(fopt), Relation::GreaterEqual,
            stage1.value - 1e-8 * (1.0 + std::abs(stage1.value)));
  auto obj = append_saa_leader_objective(m, eval_samples, y, alpha_l, "L:");
  for (auto& [v, c] : obj.terms) m.add_obj(v, c);
  auto s = solve(m);
  if (s.status != SolveStatus::Optimal) throw std::runtime_error("optimistic response LP failed");
  ResponseResult r;
  r.value = stage1.value;
  r.y.resize(inst.n);
  for (int i = 0; i < inst.n; ++i) r.y[i] = s.primal[y[i]];
  return r;
}

// ---- full-information leader problem ------------------------------------------

struct FullInfoResult {
  Vector x, y;
  double value = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::Error;
};

// The true basic model with the leader's worst-case CVaR replaced by the SAA
// over eval samples (radius 0); the follower block keeps its own data and
// ambiguity parameters. Optionally pins the leader's decision.
inline FullInfoResult full_information_leader(const InterdictionInstance& inst,
                                              const PolyhedralSupport& sup,
                                              const SampleSet& true_follower_data,
                                              const DroConfig& cfg, const SampleSet& eval_samples,
                                              const Vector* fixed_x = nullptr,
                                              const SolveOptions& sopt = {}) {
  cfg.check();
  MilpModel m;
  m.sense = Sense::Minimize;
  std::vector<int> xv;
  add_leader_polytope(m, inst, xv);
  if (fixed_x) {
    for (int i = 0; i < inst.m; ++i) {
      const double v = std::round((*fixed_x)[i]);
      m.set_bounds(xv[i], v, v);
    }
  }
  XContext xc;
  xc.vars = xv;
  auto fp = append_follower_primal_styled(m, inst, sup, true_follower_data, cfg, xc, "",
                                          FormulationStyle::Auto);
  auto fd = append_follower_dual_styled(m, inst, sup, true_follower_data, cfg, "",
                                        FormulationStyle::Auto);
  auto big_m = derive_big_m_packing(inst, sup, cfg);
  add_strong_duality_row(m, inst, cfg, xv, fp, fd, big_m.value, "");
  auto obj = append_saa_leader_objective(m, eval_samples, fp.y, cfg.alpha_l, "L:");
  for (auto& [v, c] : obj.terms) m.add_obj(v, c);
  auto s = solve(m, sopt);
  FullInfoResult r;
  r.status = s.status;
  if (s.status != SolveStatus::Optimal) return r;
  r.value = s.objective;
  r.x.resize(inst.m);
  r.y.resize(inst.n);
  for (int i = 0; i < inst.m; ++i) r.x[i] = s.primal[xv[i]];
  for (int i = 0; i < inst.n; ++i) r.y[i] = s.primal[fp.y[i]];
  return r;
}

// ---- relative losses ------------------------------------------------------------

// rho_f(yhat) / max_{y in Y(xhat)} rho_f(y); <= 1, NaN-flagged when the
// denominator is not positive (the instances here have positive costs).
inline double rl_f_out(const InterdictionInstance& inst, const Vector& xhat, const Vector& yhat,
                       const SampleSet& eval_samples, double alpha_f, bool* flagged = nullptr) {
  const double num = empirical_rho_f(eval_samples, yhat, alpha_f);
  const double den = follower_true_best_response(inst, xhat, eval_samples, alpha_f).value;
  if (flagged) *flagged = den <= 0.0;
  if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

enum class RlLeaderMode { Joint, FixedX };

// rho_l(yhat)/rho_l(ytilde) with ytilde from the full-information problem; in
// FixedX mode yhat is recomputed as the full-information response under xhat.
inline double rl_l_out(const InterdictionInstance& inst, const PolyhedralSupport& sup,
                       const Vector& xhat, const Vector& yhat_or_empty,
                       const SampleSet& true_follower_data, const DroConfig& cfg,
                       const SampleSet& eval_samples, RlLeaderMode mode,
                       const SolveOptions& sopt = {}) {
  auto ref = full_information_leader(inst, sup, true_follower_data, cfg, eval_samples, nullptr,
                                     sopt);
  if (ref.status != SolveStatus::Optimal) return std::numeric_limits<double>::quiet_NaN();
  const double den = empirical_rho_l(eval_samples, ref.y, cfg.alpha_l);
  Vector yhat = yhat_or_empty;
  if (mode == RlLeaderMode::FixedX) {
    auto fixed = full_information_leader(inst, sup, true_follower_data, cfg, eval_samples, &xhat,
                                         sopt);
    if (fixed.status != SolveStatus::Optimal) return std::numeric_limits<double>::quiet_NaN();
    yhat = fixed.y;
  }
  const double num = empirical_rho_l(eval_samples, yhat, cfg.alpha_l);
  return num / den;
}

// Plain in-sample ratio z_hat / z_b_star.
inline double rl_l_in(double z_hat, double z_b_star) { return z_hat / z_b_star; }

}  // namespace dri
