#pragma once

// Benders-type decomposition for the pessimistic approximation: the
// ambiguity-free case (master over Gamma-cuts, subproblem picking the
// worst sample average) and the risk-neutral case (master over integer
// follower responses, subproblem shifting costs inside the support), plus the
// bilinear second-level description used as a cross-validation oracle.

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dri/instance.hpp"
#include "dri/model.hpp"
#include "dri/reformulation.hpp"
#include "dri/solve.hpp"

namespace dri {

// ---- second-level bilinear description (validation oracle) -----------------

// max (1/(k(1-a))) sum_k (gamma^(k) c^(k) - xi^(k))' y  over  y in Y(x) and
// the (gamma, xi, eta) polytope; bilinear in (y, (gamma, xi)). Not submitted
// to a MILP solver; tests evaluate it by alternating LPs on tiny instances.
struct SecondLevelQuadratic {
  const InterdictionInstance* inst = nullptr;
  const PolyhedralSupport* sup = nullptr;
  SampleSet data;
  DroConfig cfg;
  Vector x;
  double scale = 0.0;  // 1/(k(1-a))

  // LP over (gamma, xi, eta) for a fixed follower response.
  MilpModel inner_for_fixed_y(const Vector& y, std::vector<int>* gamma_ids = nullptr) const {
    const int n = inst->n, k = data.count(), dS = sup->num_rows();
    MilpModel m;
    m.sense = Sense::Maximize;
    std::vector<int> g(k);
    std::vector<std::vector<int>> xi(k), eta(k);
    for (int kk = 0; kk < k; ++kk) {
      g[kk] = m.add_var("gamma(" + std::to_string(kk) + ")", 0.0, 1.0, VarKind::Continuous,
                        scale * data.row(kk).dot(y));
      xi[kk].resize(n);
      eta[kk].resize(n);
      for (int i = 0; i < n; ++i) {
        xi[kk][i] = m.add_var("xi(" + std::to_string(kk) + "," + std::to_string(i) + ")", -kInf,
                              kInf, VarKind::Continuous, -scale * y[i]);
        eta[kk][i] = m.add_var("eta(" + std::to_string(kk) + "," + std::to_string(i) + ")", 0.0,
                               kInf, VarKind::Continuous, 0.0);
      }
    }
    for (int kk = 0; kk < k; ++kk) {
      const Vector c = data.row(kk);
      for (int r = 0; r < dS; ++r) {
        LinearTerms row;  // B(gamma c - xi) <= gamma b  ->  gamma(Bc - b) - B xi <= 0
        double gcoef = sup->B.row(r).dot(c) - sup->b[r];
        row.add(g[kk], gcoef);
        for (int i = 0; i < n; ++i)
          if (sup->B(r, i) != 0.0) row.add(xi[kk][i], -sup->B(r, i));
        m.add_row("sup(" + std::to_string(kk) + "," + std::to_string(r) + ")", std::move(row),
                  Relation::LessEqual, 0.0);
      }
      for (int i = 0; i < n; ++i) {
        LinearTerms up;
        up.add(xi[kk][i], 1.0);
        up.add(eta[kk][i], -1.0);
        m.add_row("xi_up(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(up),
                  Relation::LessEqual, 0.0);
        LinearTerms dn;
        dn.add(xi[kk][i], -1.0);
        dn.add(eta[kk][i], -1.0);
        m.add_row("xi_dn(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(dn),
                  Relation::LessEqual, 0.0);
      }
    }
    LinearTerms cov;
    for (int kk = 0; kk < k; ++kk) cov.add(g[kk], 1.0);
    m.add_row("gamma_sum", std::move(cov), Relation::Equal,
              data.count() * (1.0 - cfg.alpha_l));
    // ||(1/k) sum eta||_p <= eps
    if (cfg.p == NormOrder::L1) {
      LinearTerms row;
      for (int kk = 0; kk < k; ++kk)
        for (int i = 0; i < n; ++i) row.add(eta[kk][i], 1.0 / k);
      m.add_row("eta_budget", std::move(row), Relation::LessEqual, cfg.eps_l);
    } else {
      for (int i = 0; i < n; ++i) {
        LinearTerms row;
        for (int kk = 0; kk < k; ++kk) row.add(eta[kk][i], 1.0 / k);
        m.add_row("eta_budget(" + std::to_string(i) + ")", std::move(row), Relation::LessEqual,
                  cfg.eps_l);
      }
    }
    if (gamma_ids) *gamma_ids = g;
    return m;
  }

  // LP over y for fixed multipliers: max ((1/(k(1-a))) sum_k (g^(k) c^(k) - xi^(k)))' y.
  MilpModel y_problem(const Vector& gamma, const Matrix& xi) const {
    const int n = inst->n;
    Vector coef = Vector::Zero(n);
    for (int kk = 0; kk < data.count(); ++kk)
      coef += scale * (gamma[kk] * data.row(kk) - xi.row(kk).transpose());
    MilpModel m;
    m.sense = Sense::Maximize;
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i)
      y[i] = m.add_var("y(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, coef[i]);
    const Vector rhs = inst->f - inst->L * x;
    for (int j = 0; j < inst->d_f(); ++j) {
      LinearTerms row;
      for (int i = 0; i < n; ++i) row.add(y[i], inst->F(j, i));
      m.add_row("Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs[j]);
    }
    return m;
  }
};

inline SecondLevelQuadratic build_second_level_quadratic(const InterdictionInstance& inst,
                                                         const PolyhedralSupport& sup,
                                                         const SampleSet& data_l,
                                                         const DroConfig& cfg, const Vector& x) {
  cfg.check();
  if (cfg.alpha_l >= 1.0) throw std::invalid_argument("alpha_l must be < 1");
  require_x_in_X(inst, x);
  SecondLevelQuadratic q;
  q.inst = &inst;
  q.sup = &sup;
  q.data = data_l;
  q.cfg = cfg;
  q.x = x;
  q.scale = 1.0 / (data_l.count() * (1.0 - cfg.alpha_l));
  return q;
}

// ---- shared Benders pieces ---------------------------------------------------

struct BendersTraceRow {
  int iter = 0;
  double lb = 0.0, ub = 0.0;
  double wall_s = 0.0;
  int cut_id = -1;
};

struct BendersResult {
  SolveStatus status = SolveStatus::Error;
  Vector x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<BendersTraceRow> trace;
  int iterations = 0;
  double alpha_used = 0.0;  // after any A6 repair
  std::string note;
};

inline std::string trace_csv(const std::vector<BendersTraceRow>& trace) {
  std::string out = "iter,LB,UB,wall_s,cut_id\n";
  for (const auto& r : trace)
    out += std::to_string(r.iter) + "," + render_double(r.lb) + "," + render_double(r.ub) + "," +
           render_double(r.wall_s) + "," + std::to_string(r.cut_id) + "\n";
  return out;
}

// If k(1-alpha) is fractional, round the retained-sample count up (slightly
// less risk-averse) and recompute alpha.
inline double repair_alpha_for_a6(double alpha, int k, bool* repaired = nullptr) {
  const double m = k * (1.0 - alpha);
  const double mi = std::round(m);
  if (std::abs(m - mi) < 1e-9 && mi >= 1.0) {
    if (repaired) *repaired = false;
    return alpha;
  }
  const double up = std::max(1.0, std::ceil(m - 1e-9));
  if (repaired) *repaired = true;
  return 1.0 - up / k;
}

// Mean of the samples selected by gamma, scaled by the retained count.
inline Vector gamma_cost(const SampleSet& data, const std::vector<int>& gamma, double alpha) {
  const double denom = data.count() * (1.0 - alpha);
  Vector c = Vector::Zero(data.dim());
  for (int kk = 0; kk < data.count(); ++kk)
    if (gamma[kk]) c += data.row(kk);
  return c / denom;
}

// Follower value bounds used to linearize gamma*y and the master products.
inline Vector follower_upper_bounds(const InterdictionInstance& inst) {
  if (inst.packing_form) return inst.packing_form->U;
  Vector ub(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    MilpModel m;
    m.sense = Sense::Maximize;
    std::vector<int> y(inst.n);
    for (int j = 0; j < inst.n; ++j)
      y[j] = m.add_var("y" + std::to_string(j), 0.0, kInf, VarKind::Continuous,
                       j == i ? 1.0 : 0.0);
    for (int r = 0; r < inst.d_f(); ++r) {
      LinearTerms row;
      for (int j = 0; j < inst.n; ++j) row.add(y[j], inst.F(r, j));
      m.add_row("F" + std::to_string(r), std::move(row), Relation::LessEqual, inst.f[r]);
    }
    auto s = solve(m);
    if (s.status != SolveStatus::Optimal)
      throw std::runtime_error("could not bound follower variable y_" + std::to_string(i));
    ub[i] = s.objective;
  }
  return ub;
}

// ---- ambiguity-free case (eps_l = 0) ----------------------------------------

struct MasterHandles {
  MilpModel model;
  std::vector<int> x;
  int z = -1;
};

// Master over accumulated Gamma cuts: per cut, dual feasibility F'beta >=
// cbar(gamma) with z >= beta'(f - Lx), the x.beta products McCormick-bounded
// by max{1, n}.
inline MasterHandles build_master_ambiguity_free(const InterdictionInstance& inst,
                                                 const SampleSet& data_l, const DroConfig& cfg,
                                                 const std::vector<std::vector<int>>& gamma_pool) {
  if (gamma_pool.empty())
    throw std::invalid_argument("master needs at least one cut; solve the subproblem first");
  MasterHandles H;
  H.model.sense = Sense::Minimize;
  add_leader_polytope(H.model, inst, H.x);
  H.z = H.model.add_var("z", -kInf, kInf, VarKind::Continuous, 1.0);
  const double big_m = std::max(1.0, static_cast<double>(inst.n));
  for (std::size_t c = 0; c < gamma_pool.size(); ++c) {
    const std::string pre = "cut" + std::to_string(c) + ":";
    const Vector cbar = gamma_cost(data_l, gamma_pool[c], cfg.alpha_l);
    std::vector<int> beta(inst.d_f());
    for (int j = 0; j < inst.d_f(); ++j)
      beta[j] = H.model.add_var(pre + "beta(" + std::to_string(j) + ")", 0.0, kInf,
                                VarKind::Continuous, 0.0);
    for (int i = 0; i < inst.n; ++i) {
      LinearTerms row;
      for (int j = 0; j < inst.d_f(); ++j)
        if (inst.F(j, i) != 0.0) row.add(beta[j], inst.F(j, i));
      H.model.add_row(pre + "dualfeas(" + std::to_string(i) + ")", std::move(row),
                      Relation::GreaterEqual, cbar[i]);
    }
    // z >= beta'(f - Lx) with products linearized
    LinearTerms row;
    const int dt = inst.packing_form ? static_cast<int>(inst.packing_form->Ftilde.rows()) : -1;
    if (dt >= 0) {
      for (int j = 0; j < dt; ++j) row.add(beta[j], inst.f[j]);
      for (int i = 0; i < inst.n; ++i) {
        const int b2 = beta[dt + i];
        H.model.set_bounds(b2, 0.0, big_m);
        const int p = H.model.add_var(pre + "p(" + std::to_string(i) + ")", 0.0, big_m,
                                      VarKind::Continuous, 0.0);
        add_mccormick(H.model, p, b2, H.x[i], big_m, pre + "mc(" + std::to_string(i) + ")");
        row.add(p, inst.packing_form->U[i]);
      }
    } else {
      for (int j = 0; j < inst.d_f(); ++j) {
        row.add(beta[j], inst.f[j]);
        for (int i = 0; i < inst.m; ++i) {
          if (inst.L(j, i) == 0.0) continue;
          H.model.set_bounds(beta[j], 0.0, big_m);
          const int p = H.model.add_var(
              pre + "p(" + std::to_string(j) + "," + std::to_string(i) + ")", 0.0, big_m,
              VarKind::Continuous, 0.0);
          add_mccormick(H.model, p, beta[j], H.x[i], big_m,
                        pre + "mc(" + std::to_string(j) + "," + std::to_string(i) + ")");
          row.add(beta[j], -inst.L(j, i));
          row.add(p, inst.L(j, i));
        }
      }
    }
    row.add(H.z, -1.0);
    H.model.add_row(pre + "cut", std::move(row), Relation::LessEqual, 0.0);
  }
  return H;
}

struct SubHandles {
  MilpModel model;
  std::vector<int> y;
  std::vector<int> gamma;  // binaries (Algorithm 1 subproblem)
};

// max { cbar(gamma)'y : y in Y(x), gamma in Gamma } with gamma*y products.
inline SubHandles build_sub_ambiguity_free(const InterdictionInstance& inst,
                                           const SampleSet& data_l, const DroConfig& cfg,
                                           const Vector& x) {
  require_x_in_X(inst, x);
  const int n = inst.n, k = data_l.count();
  const double retained = k * (1.0 - cfg.alpha_l);
  const double scale = 1.0 / retained;
  const Vector ybound = follower_upper_bounds(inst);
  SubHandles H;
  H.model.sense = Sense::Maximize;
  H.y.resize(n);
  for (int i = 0; i < n; ++i)
    H.y[i] = H.model.add_var("y(" + std::to_string(i) + ")", 0.0, ybound[i],
                             VarKind::Continuous, 0.0);
  const Vector rhs = inst.f - inst.L * x;
  for (int j = 0; j < inst.d_f(); ++j) {
    LinearTerms row;
    for (int i = 0; i < n; ++i) row.add(H.y[i], inst.F(j, i));
    H.model.add_row("Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs[j]);
  }
  H.gamma.resize(k);
  for (int kk = 0; kk < k; ++kk)
    H.gamma[kk] =
        H.model.add_var("gamma(" + std::to_string(kk) + ")", 0.0, 1.0, VarKind::Binary, 0.0);
  {
    LinearTerms row;
    for (int kk = 0; kk < k; ++kk) row.add(H.gamma[kk], 1.0);
    H.model.add_row("gamma_sum", std::move(row), Relation::Equal, retained);
  }
  for (int kk = 0; kk < k; ++kk) {
    const Vector c = data_l.row(kk);
    for (int i = 0; i < n; ++i) {
      // w = gamma * y, y in [0, ybound]
      const int w = H.model.add_var("w(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                                    0.0, ybound[i], VarKind::Continuous, scale * c[i]);
      LinearTerms r1;
      r1.add(w, 1.0);
      r1.add(H.y[i], -1.0);
      H.model.add_row("w_le_y(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                      std::move(r1), Relation::LessEqual, 0.0);
      LinearTerms r2;
      r2.add(w, 1.0);
      r2.add(H.gamma[kk], -ybound[i]);
      H.model.add_row("w_le_g(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                      std::move(r2), Relation::LessEqual, 0.0);
      LinearTerms r3;
      r3.add(w, 1.0);
      r3.add(H.y[i], -1.0);
      r3.add(H.gamma[kk], -ybound[i]);
      H.model.add_row("w_ge(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(r3),
                      Relation::GreaterEqual, -ybound[i]);
    }
  }
  return H;
}

// Algorithm 1: alternate the subproblem (upper bounds, new gamma cut) and the
// master (lower bounds) until the gap closes.
inline BendersResult benders_ambiguity_free(const InterdictionInstance& inst,
                                            const PolyhedralSupport& sup, const SampleSet& data_l,
                                            DroConfig cfg, const Vector& x0, double delta,
                                            const SolveOptions& sopt = {}) {
  cfg.check();
  if (cfg.eps_l != 0.0)
    throw std::invalid_argument("ambiguity-free algorithm requires eps_l = 0");
  for (int kk = 0; kk < data_l.count(); ++kk)
    if ((slack_delta(sup, data_l.row(kk)).array() < -kTolFeas).any())
      throw std::invalid_argument("leader sample outside S");
  BendersResult res;
  bool repaired = false;
  cfg.alpha_l = repair_alpha_for_a6(cfg.alpha_l, data_l.count(), &repaired);
  res.alpha_used = cfg.alpha_l;
  if (repaired) res.note = "alpha_l perturbed to satisfy the integrality assumption";

  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  double lb = -kInf, ub = kInf;
  Vector xhat = x0;
  std::vector<std::vector<int>> pool;
  int iter = 0;
  while (ub - lb > delta) {
    ++iter;
    auto sub = build_sub_ambiguity_free(inst, data_l, cfg, xhat);
    auto ss = solve(sub.model, sopt);
    if (ss.status != SolveStatus::Optimal) {
      res.status = ss.status;
      res.note += "; subproblem " + std::string(to_string(ss.status));
      return res;
    }
    if (ss.objective < ub) {
      ub = ss.objective;
      res.x = xhat;
      res.objective = ub;
    }
    std::vector<int> gamma(data_l.count());
    for (int kk = 0; kk < data_l.count(); ++kk)
      gamma[kk] = ss.primal[sub.gamma[kk]] > 0.5 ? 1 : 0;
    bool dup = false;
    for (const auto& g : pool) dup = dup || g == gamma;
    if (dup) {
      // a repeated cut certifies that the master bound is exact
      lb = std::max(lb, ub);
      res.trace.push_back({iter, lb, ub, wall(), static_cast<int>(pool.size()) - 1});
      break;
    }
    pool.push_back(gamma);
    auto master = build_master_ambiguity_free(inst, data_l, cfg, pool);
    auto ms = solve(master.model, sopt);
    if (ms.status != SolveStatus::Optimal) {
      res.status = ms.status;
      res.note += "; master " + std::string(to_string(ms.status));
      return res;
    }
    lb = std::max(lb, ms.objective);
    for (int i = 0; i < inst.m; ++i) xhat[i] = ms.primal[master.x[i]];
    res.trace.push_back({iter, lb, ub, wall(), static_cast<int>(pool.size()) - 1});
  }
  res.status = SolveStatus::Optimal;
  res.iterations = iter;
  return res;
}

// ---- risk-neutral case (alpha_l = 0) ----------------------------------------

// Necessary-condition screen for the unimodularity assumption; instances known
// to satisfy it by construction can attest instead.
inline bool check_a6_prime(const InterdictionInstance& inst, bool attested,
                           std::string* why = nullptr) {
  if (!inst.packing_form) {
    if (why) *why = "A6' requires the packing decomposition (F = [F~; I], L = [0; U])";
    return false;
  }
  if ((inst.packing_form->U.array() != 1.0).any()) {
    if (why) *why = "A6' integer treatment implemented for unit interdiction bounds U = I";
    return false;
  }
  if (attested) return true;
  const Matrix& Ft = inst.packing_form->Ftilde;
  for (int i = 0; i < Ft.rows(); ++i)
    for (int j = 0; j < Ft.cols(); ++j)
      if (Ft(i, j) != 0.0 && Ft(i, j) != 1.0 && Ft(i, j) != -1.0) {
        if (why) *why = "A6' heuristic: F~ entries must lie in {-1, 0, 1}";
        return false;
      }
  for (int i = 0; i < Ft.rows(); ++i)
    if (inst.packing_form->ftilde[i] != std::floor(inst.packing_form->ftilde[i])) {
      if (why) *why = "A6' heuristic: f~ must be integral";
      return false;
    }
  return true;
}

inline bool y_in_ybar(const InterdictionInstance& inst, const Vector& y) {
  for (int i = 0; i < inst.n; ++i) {
    if (y[i] < -1e-9 || std::abs(y[i] - std::round(y[i])) > 1e-9) return false;
    if (y[i] > inst.packing_form->U[i] + 1e-9) return false;
  }
  return ((inst.packing_form->Ftilde * y - inst.packing_form->ftilde).array() <= 1e-9).all();
}

// Master over integer follower responses: per cut y,
//   z >= eps_l lam(y) + cbar'y - M x'y + (1/k) sum_k Delta^(k)' nu^(k)(y)
// with the dual-norm rows tying nu(y) to lam(y); M = n.
inline MasterHandles build_master_risk_neutral(const InterdictionInstance& inst,
                                               const PolyhedralSupport& sup,
                                               const SampleSet& data_l, const DroConfig& cfg,
                                               const std::vector<Vector>& y_pool) {
  if (y_pool.empty())
    throw std::invalid_argument("master needs at least one cut; solve the subproblem first");
  for (const auto& y : y_pool)
    if (!y_in_ybar(inst, y)) throw std::invalid_argument("cut is not an integer point of Ybar");
  MasterHandles H;
  H.model.sense = Sense::Minimize;
  add_leader_polytope(H.model, inst, H.x);
  H.z = H.model.add_var("z", -kInf, kInf, VarKind::Continuous, 1.0);
  const double big_m = static_cast<double>(inst.n);
  const Vector cbar = data_l.mean();
  const int k = data_l.count(), dS = sup.num_rows();
  for (std::size_t c = 0; c < y_pool.size(); ++c) {
    const std::string pre = "cut" + std::to_string(c) + ":";
    const Vector& y = y_pool[c];
    const int lam = H.model.add_var(pre + "lam", 0.0, kInf, VarKind::Continuous, 0.0);
    LinearTerms cut;
    cut.add(H.z, -1.0);
    cut.add(lam, cfg.eps_l);
    double rhs = -cbar.dot(y);
    for (int i = 0; i < inst.m; ++i)
      if (y[i] != 0.0) cut.add(H.x[i], -big_m * y[i]);
    for (int kk = 0; kk < k; ++kk) {
      const Vector delta = slack_delta(sup, data_l.row(kk));
      if ((delta.array() < -kTolFeas).any())
        throw std::invalid_argument("leader sample outside S");
      std::vector<int> nu(dS);
      for (int r = 0; r < dS; ++r)
        nu[r] = H.model.add_var(pre + "nu(" + std::to_string(kk) + "," + std::to_string(r) + ")",
                                0.0, kInf, VarKind::Continuous, 0.0);
      for (int r = 0; r < dS; ++r)
        if (delta[r] != 0.0) cut.add(nu[r], delta[r] / k);
      std::vector<LinearTerms> exprs(inst.n);
      for (int i = 0; i < inst.n; ++i) {
        for (int r = 0; r < dS; ++r)
          if (sup.B(r, i) != 0.0) exprs[i].add(nu[r], sup.B(r, i));
      }
      // || B'nu - y ||_q <= lam with constant y folded into the rows
      if (cfg.q() == NormOrder::LInf) {
        for (int i = 0; i < inst.n; ++i) {
          LinearTerms up = exprs[i];
          up.add(lam, -1.0);
          H.model.add_row(pre + "nrm_up(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                          std::move(up), Relation::LessEqual, y[i]);
          LinearTerms dn;
          for (auto& [v, cc] : exprs[i].terms) dn.add(v, -cc);
          dn.add(lam, -1.0);
          H.model.add_row(pre + "nrm_dn(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                          std::move(dn), Relation::LessEqual, -y[i]);
        }
      } else {
        LinearTerms sum;
        for (int i = 0; i < inst.n; ++i) {
          const int a = H.model.add_var(
              pre + "abs(" + std::to_string(kk) + "," + std::to_string(i) + ")", 0.0, kInf,
              VarKind::Continuous, 0.0);
          LinearTerms up = exprs[i];
          up.add(a, -1.0);
          H.model.add_row(pre + "nrm_up(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                          std::move(up), Relation::LessEqual, y[i]);
          LinearTerms dn;
          for (auto& [v, cc] : exprs[i].terms) dn.add(v, -cc);
          dn.add(a, -1.0);
          H.model.add_row(pre + "nrm_dn(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                          std::move(dn), Relation::LessEqual, -y[i]);
          sum.add(a, 1.0);
        }
        sum.add(lam, -1.0);
        H.model.add_row(pre + "nrm_sum(" + std::to_string(kk) + ")", std::move(sum),
                        Relation::LessEqual, 0.0);
      }
    }
    H.model.add_row(pre + "cut", std::move(cut), Relation::LessEqual, rhs);
  }
  return H;
}

struct SubRnHandles {
  MilpModel model;
  std::vector<int> y;                 // binaries under A6'
  std::vector<std::vector<int>> xi;   // [k][i]
  std::vector<std::vector<int>> eta;  // [k][i]
};

// max (1/k) sum_k (c^(k) - xi^(k))'y over integer y in Y(x) and (xi, eta) in
// Xi; the xi*y products are exact for binary y.
inline SubRnHandles build_sub_risk_neutral(const InterdictionInstance& inst,
                                           const PolyhedralSupport& sup, const SampleSet& data_l,
                                           const DroConfig& cfg, const Vector& x,
                                           bool attest_a6prime = false) {
  require_x_in_X(inst, x);
  if (cfg.alpha_l != 0.0) throw std::invalid_argument("risk-neutral algorithm requires alpha_l = 0");
  std::string why;
  if (!check_a6_prime(inst, attest_a6prime, &why)) throw std::invalid_argument(why);
  const int n = inst.n, k = data_l.count(), dS = sup.num_rows();
  const auto [slo, shi] = support_coordinate_range(sup);
  SubRnHandles H;
  H.model.sense = Sense::Maximize;
  H.y.resize(n);
  for (int i = 0; i < n; ++i) {
    H.y[i] = H.model.add_var("y(" + std::to_string(i) + ")", 0.0, 1.0, VarKind::Binary, 0.0);
  }
  const Vector rhs = inst.f - inst.L * x;
  for (int j = 0; j < inst.d_f(); ++j) {
    LinearTerms row;
    for (int i = 0; i < n; ++i) row.add(H.y[i], inst.F(j, i));
    H.model.add_row("Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs[j]);
  }
  H.xi.resize(k);
  H.eta.resize(k);
  std::vector<std::vector<int>> v(k);
  for (int kk = 0; kk < k; ++kk) {
    const Vector c = data_l.row(kk);
    H.xi[kk].resize(n);
    H.eta[kk].resize(n);
    v[kk].resize(n);
    for (int i = 0; i < n; ++i) {
      H.model.add_obj(H.y[i], c[i] / k);
      const double xlo = c[i] - shi[i], xhi = c[i] - slo[i];
      H.xi[kk][i] = H.model.add_var("xi(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                                    xlo, xhi, VarKind::Continuous, 0.0);
      H.eta[kk][i] = H.model.add_var("eta(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                                     0.0, kInf, VarKind::Continuous, 0.0);
      // v = xi*y for binary y, xi in [xlo, xhi]
      v[kk][i] = H.model.add_var("v(" + std::to_string(kk) + "," + std::to_string(i) + ")", -kInf,
                                 kInf, VarKind::Continuous, -1.0 / k);
      LinearTerms r1;
      r1.add(v[kk][i], 1.0);
      r1.add(H.y[i], -xhi);
      H.model.add_row("v1(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(r1),
                      Relation::LessEqual, 0.0);
      LinearTerms r2;
      r2.add(v[kk][i], 1.0);
      r2.add(H.y[i], -xlo);
      H.model.add_row("v2(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(r2),
                      Relation::GreaterEqual, 0.0);
      LinearTerms r3;  // v >= xi - xhi(1 - y)
      r3.add(v[kk][i], 1.0);
      r3.add(H.xi[kk][i], -1.0);
      r3.add(H.y[i], -xhi);
      H.model.add_row("v3(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(r3),
                      Relation::GreaterEqual, -xhi);
      LinearTerms r4;  // v <= xi - xlo(1 - y)
      r4.add(v[kk][i], 1.0);
      r4.add(H.xi[kk][i], -1.0);
      r4.add(H.y[i], -xlo);
      H.model.add_row("v4(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(r4),
                      Relation::LessEqual, -xlo);
      // |xi| <= eta
      LinearTerms e1;
      e1.add(H.xi[kk][i], 1.0);
      e1.add(H.eta[kk][i], -1.0);
      H.model.add_row("xe1(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(e1),
                      Relation::LessEqual, 0.0);
      LinearTerms e2;
      e2.add(H.xi[kk][i], -1.0);
      e2.add(H.eta[kk][i], -1.0);
      H.model.add_row("xe2(" + std::to_string(kk) + "," + std::to_string(i) + ")", std::move(e2),
                      Relation::LessEqual, 0.0);
    }
    // support membership: B(c - xi) <= b
    for (int r = 0; r < dS; ++r) {
      LinearTerms row;
      for (int i = 0; i < n; ++i)
        if (sup.B(r, i) != 0.0) row.add(H.xi[kk][i], -sup.B(r, i));
      H.model.add_row("sup(" + std::to_string(kk) + "," + std::to_string(r) + ")", std::move(row),
                      Relation::LessEqual, sup.b[r] - sup.B.row(r).dot(c));
    }
  }
  // ||(1/k) sum eta||_p <= eps_l
  if (cfg.p == NormOrder::L1) {
    LinearTerms row;
    for (int kk = 0; kk < k; ++kk)
      for (int i = 0; i < n; ++i) row.add(H.eta[kk][i], 1.0 / k);
    H.model.add_row("eta_budget", std::move(row), Relation::LessEqual, cfg.eps_l);
  } else {
    for (int i = 0; i < n; ++i) {
      LinearTerms row;
      for (int kk = 0; kk < k; ++kk) row.add(H.eta[kk][i], 1.0 / k);
      H.model.add_row("eta_budget(" + std::to_string(i) + ")", std::move(row),
                      Relation::LessEqual, cfg.eps_l);
    }
  }
  return H;
}

// Algorithm 2 (risk-neutral leader), same loop skeleton as Algorithm 1 with
// integer follower responses as cuts.
inline BendersResult benders_risk_neutral(const InterdictionInstance& inst,
                                          const PolyhedralSupport& sup, const SampleSet& data_l,
                                          const DroConfig& cfg, double delta,
                                          bool attest_a6prime = false,
                                          const SolveOptions& sopt = {}) {
  cfg.check();
  if (cfg.alpha_l != 0.0) throw std::invalid_argument("risk-neutral algorithm requires alpha_l = 0");
  std::string why;
  if (!check_a6_prime(inst, attest_a6prime, &why)) throw std::invalid_argument(why);
  BendersResult res;
  res.alpha_used = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  double lb = -kInf, ub = kInf;
  Vector xhat = Vector::Zero(inst.m);
  std::vector<Vector> pool;
  int iter = 0;
  while (ub - lb > delta) {
    ++iter;
    auto sub = build_sub_risk_neutral(inst, sup, data_l, cfg, xhat, attest_a6prime);
    auto ss = solve(sub.model, sopt);
    if (ss.status != SolveStatus::Optimal) {
      res.status = ss.status;
      res.note += "; subproblem " + std::string(to_string(ss.status));
      return res;
    }
    if (ss.objective < ub) {
      ub = ss.objective;
      res.x = xhat;
      res.objective = ub;
    }
    Vector yhat(inst.n);
    for (int i = 0; i < inst.n; ++i) yhat[i] = std::round(ss.primal[sub.y[i]]);
    bool dup = false;
    for (const auto& yy : pool) dup = dup || (yy - yhat).lpNorm<Eigen::Infinity>() < 0.5;
    if (dup) {
      lb = std::max(lb, ub);
      res.trace.push_back({iter, lb, ub, wall(), static_cast<int>(pool.size()) - 1});
      break;
    }
    pool.push_back(yhat);
    auto master = build_master_risk_neutral(inst, sup, data_l, cfg, pool);
    auto ms = solve(master.model, sopt);
    if (ms.status != SolveStatus::Optimal) {
      res.status = ms.status;
      res.note += "; master " + std::string(to_string(ms.status));
      return res;
    }
    lb = std::max(lb, ms.objective);
    for (int i = 0; i < inst.m; ++i) xhat[i] = ms.primal[master.x[i]];
    res.trace.push_back({iter, lb, ub, wall(), static_cast<int>(pool.size()) - 1});
  }
  res.status = SolveStatus::Optimal;
  res.iterations = iter;
  return res;
}

}  // namespace dri
