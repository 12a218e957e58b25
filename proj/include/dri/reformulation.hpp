#pragma once

// LP/MILP reformulations of the interdiction models: the follower's
// worst-case-CVaR LP and its dual, the single-level basic-model MILP with
// strong duality and big-M linearization, and the scenario-replicated
// semi-pessimistic MILP.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dri/instance.hpp"
#include "dri/model.hpp"

namespace dri {

// ---- shared pieces ---------------------------------------------------------

// Worst-case-CVaR blocks come in two algebraically equivalent shapes: the
// literal per-sample nu/mu machinery of the paper's LPs, and a compact form
// valid for interval supports with the l1 Wasserstein metric, where the inner
// support minimization has a closed form and the dual mu-block aggregates
// exactly. The compact form is an order of magnitude smaller at large sample
// counts; Auto picks it whenever it applies.
enum class FormulationStyle { Literal, BoxCompact, Auto };

// Per-coordinate bounds when every row of (B, b) is a singleton +-e_i row
// (redundant rows fold into the tightest bound).
inline std::optional<std::pair<Vector, Vector>> detect_box(const PolyhedralSupport& sup) {
  const int n = sup.dim();
  Vector lo = Vector::Constant(n, -kInf), hi = Vector::Constant(n, kInf);
  for (int r = 0; r < sup.num_rows(); ++r) {
    int idx = -1;
    double coef = 0.0;
    for (int i = 0; i < n; ++i)
      if (sup.B(r, i) != 0.0) {
        if (idx >= 0) return std::nullopt;
        idx = i;
        coef = sup.B(r, i);
      }
    if (idx < 0 || (coef != 1.0 && coef != -1.0)) return std::nullopt;
    if (coef > 0)
      hi[idx] = std::min(hi[idx], sup.b[r]);
    else
      lo[idx] = std::max(lo[idx], -sup.b[r]);
  }
  for (int i = 0; i < n; ++i)
    if (!(lo[i] > -kInf) || !(hi[i] < kInf) || lo[i] > hi[i]) return std::nullopt;
  return std::make_pair(lo, hi);
}

inline bool compact_applicable(const PolyhedralSupport& sup, const DroConfig& cfg) {
  return cfg.p == NormOrder::L1 && detect_box(sup).has_value();
}

inline FormulationStyle resolve_style(FormulationStyle s, const PolyhedralSupport& sup,
                                      const DroConfig& cfg) {
  if (s == FormulationStyle::Auto)
    return compact_applicable(sup, cfg) ? FormulationStyle::BoxCompact : FormulationStyle::Literal;
  if (s == FormulationStyle::BoxCompact && !compact_applicable(sup, cfg))
    throw std::invalid_argument("compact formulation needs an interval support and p = 1");
  return s;
}

// Adds rows enforcing ||expr||_q <= bound_var. For q = inf these are the 2n
// component bounds; for q = 1 one absolute-value variable per component plus
// the summing row.
inline void expand_dual_norm_constraint(MilpModel& m, const std::vector<LinearTerms>& exprs,
                                        int bound_var, NormOrder q, const std::string& prefix) {
  if (q == NormOrder::LInf) {
    for (std::size_t i = 0; i < exprs.size(); ++i) {
      LinearTerms up = exprs[i];
      up.add(bound_var, -1.0);
      m.add_row(prefix + "_up(" + std::to_string(i) + ")", std::move(up), Relation::LessEqual, 0.0);
      LinearTerms dn;
      for (auto& [v, c] : exprs[i].terms) dn.add(v, -c);
      dn.add(bound_var, -1.0);
      m.add_row(prefix + "_dn(" + std::to_string(i) + ")", std::move(dn), Relation::LessEqual, 0.0);
    }
    return;
  }
  LinearTerms sum;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    const int a = m.add_var(prefix + "_abs(" + std::to_string(i) + ")", 0.0, kInf,
                            VarKind::Continuous, 0.0);
    LinearTerms up = exprs[i];
    up.add(a, -1.0);
    m.add_row(prefix + "_up(" + std::to_string(i) + ")", std::move(up), Relation::LessEqual, 0.0);
    LinearTerms dn;
    for (auto& [v, c] : exprs[i].terms) dn.add(v, -c);
    dn.add(a, -1.0);
    m.add_row(prefix + "_dn(" + std::to_string(i) + ")", std::move(dn), Relation::LessEqual, 0.0);
    sum.add(a, 1.0);
  }
  sum.add(bound_var, -1.0);
  m.add_row(prefix + "_sum", std::move(sum), Relation::LessEqual, 0.0);
}

// Either a constant leader decision or model variables for it.
struct XContext {
  std::vector<int> vars;  // empty when constant
  Vector value;           // used when vars is empty

  bool is_var() const { return !vars.empty(); }
};

struct LeaderCvarHandles {
  std::vector<int> y;
  std::vector<std::vector<int>> nu;  // [k][row of B]
  std::vector<int> s;
  int lam = -1, t = -1;

  // objective expression t + (1/(1-a))(eps*lam + (1/k) sum s)
  LinearTerms objective(double alpha, double eps, int k) const {
    LinearTerms o;
    o.add(t, 1.0);
    o.add(lam, eps / (1.0 - alpha));
    for (int i = 0; i < k; ++i) o.add(s[i], 1.0 / ((1.0 - alpha) * k));
    return o;
  }
};

// Leader worst-case CVaR block: per sample k,
//   c^(k).y - t + Delta^(k).nu^(k) <= s^(k),  ||B' nu^(k) - y||_q <= lam.
inline LeaderCvarHandles append_leader_cvar_block(MilpModel& m, const PolyhedralSupport& sup,
                                                  const SampleSet& data, const DroConfig& cfg,
                                                  const std::vector<int>& y,
                                                  const std::string& pre) {
  const int n = sup.dim(), dS = sup.num_rows(), k = data.count();
  LeaderCvarHandles H;
  H.y = y;
  H.t = m.add_var(pre + "t_l", -kInf, kInf, VarKind::Continuous, 0.0);
  H.lam = m.add_var(pre + "lam_l", 0.0, kInf, VarKind::Continuous, 0.0);
  H.nu.resize(k);
  H.s.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    H.s[kk] = m.add_var(pre + "s_l(" + std::to_string(kk) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
    H.nu[kk].resize(dS);
    for (int r = 0; r < dS; ++r)
      H.nu[kk][r] = m.add_var(pre + "nu_l(" + std::to_string(kk) + "," + std::to_string(r) + ")",
                              0.0, kInf, VarKind::Continuous, 0.0);
    const Vector c = data.row(kk);
    const Vector delta = slack_delta(sup, c);
    if ((delta.array() < -kTolFeas).any())
      throw std::invalid_argument("leader sample " + std::to_string(kk) + " lies outside S");
    LinearTerms epi;
    for (int i = 0; i < n; ++i) epi.add(y[i], c[i]);
    epi.add(H.t, -1.0);
    for (int r = 0; r < dS; ++r) epi.add(H.nu[kk][r], delta[r]);
    epi.add(H.s[kk], -1.0);
    m.add_row(pre + "epi_l(" + std::to_string(kk) + ")", std::move(epi), Relation::LessEqual, 0.0);
    std::vector<LinearTerms> exprs(n);
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < dS; ++r)
        if (sup.B(r, i) != 0.0) exprs[i].add(H.nu[kk][r], sup.B(r, i));
      exprs[i].add(y[i], -1.0);
    }
    expand_dual_norm_constraint(m, exprs, H.lam, cfg.q(), pre + "nrm_l(" + std::to_string(kk) + ")");
  }
  return H;
}

struct FollowerPrimalHandles {
  std::vector<int> y;
  std::vector<std::vector<int>> nu;
  std::vector<int> s;
  int lam = -1, t = -1;

  // objective expression t - (1/(1-a))(eps*lam + (1/k) sum s), to maximize
  LinearTerms objective(double alpha, double eps, int k) const {
    LinearTerms o;
    o.add(t, 1.0);
    o.add(lam, -eps / (1.0 - alpha));
    for (int i = 0; i < k; ++i) o.add(s[i], -1.0 / ((1.0 - alpha) * k));
    return o;
  }
};

// Follower block of the worst-case-CVaR LP: the polytope rows F y + L x <= f
// plus, per sample k,
//   -c^(k).y + t + Delta^(k).nu^(k) <= s^(k),  ||B' nu^(k) + y||_q <= lam.
inline FollowerPrimalHandles append_follower_primal_block(MilpModel& m,
                                                          const InterdictionInstance& inst,
                                                          const PolyhedralSupport& sup,
                                                          const SampleSet& data,
                                                          const DroConfig& cfg, const XContext& x,
                                                          const std::string& pre) {
  const int n = inst.n, dS = sup.num_rows(), k = data.count();
  if (k < 1) throw std::invalid_argument("follower data set must contain at least one sample");
  FollowerPrimalHandles H;
  H.y.resize(n);
  for (int i = 0; i < n; ++i)
    H.y[i] = m.add_var(pre + "y(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  H.t = m.add_var(pre + "t_f", -kInf, kInf, VarKind::Continuous, 0.0);
  H.lam = m.add_var(pre + "lam_f", 0.0, kInf, VarKind::Continuous, 0.0);

  for (int j = 0; j < inst.d_f(); ++j) {
    LinearTerms row;
    for (int i = 0; i < n; ++i) row.add(H.y[i], inst.F(j, i));
    double rhs = inst.f[j];
    if (x.is_var()) {
      for (int i = 0; i < inst.m; ++i) row.add(x.vars[i], inst.L(j, i));
    } else {
      rhs -= inst.L.row(j).dot(x.value);
    }
    m.add_row(pre + "Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs);
  }

  H.nu.resize(k);
  H.s.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    H.s[kk] = m.add_var(pre + "s_f(" + std::to_string(kk) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
    H.nu[kk].resize(dS);
    for (int r = 0; r < dS; ++r)
      H.nu[kk][r] = m.add_var(pre + "nu_f(" + std::to_string(kk) + "," + std::to_string(r) + ")",
                              0.0, kInf, VarKind::Continuous, 0.0);
    const Vector c = data.row(kk);
    const Vector delta = slack_delta(sup, c);
    if ((delta.array() < -kTolFeas).any())
      throw std::invalid_argument("follower sample " + std::to_string(kk) + " lies outside S");
    LinearTerms epi;
    for (int i = 0; i < n; ++i) epi.add(H.y[i], -c[i]);
    epi.add(H.t, 1.0);
    for (int r = 0; r < dS; ++r) epi.add(H.nu[kk][r], delta[r]);
    epi.add(H.s[kk], -1.0);
    m.add_row(pre + "epi_f(" + std::to_string(kk) + ")", std::move(epi), Relation::LessEqual, 0.0);
    std::vector<LinearTerms> exprs(n);
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < dS; ++r)
        if (sup.B(r, i) != 0.0) exprs[i].add(H.nu[kk][r], sup.B(r, i));
      exprs[i].add(H.y[i], 1.0);
    }
    expand_dual_norm_constraint(m, exprs, H.lam, cfg.q(), pre + "nrm_f(" + std::to_string(kk) + ")");
  }
  return H;
}

// Compact leader block (interval support, p = 1): shared deviations
// w_i >= max(0, y_i - lam) replace the per-sample nu variables, with epigraph
//   c^(k).y - t + sum_i (hi_i - c^(k)_i) w_i <= s^(k).
inline LeaderCvarHandles append_leader_cvar_block_box(MilpModel& m, const PolyhedralSupport& sup,
                                                      const SampleSet& data, const DroConfig& cfg,
                                                      const std::vector<int>& y,
                                                      const std::string& pre) {
  const auto box = detect_box(sup);
  const auto& [lo, hi] = *box;
  const int n = sup.dim(), k = data.count();
  LeaderCvarHandles H;
  H.y = y;
  H.t = m.add_var(pre + "t_l", -kInf, kInf, VarKind::Continuous, 0.0);
  H.lam = m.add_var(pre + "lam_l", 0.0, kInf, VarKind::Continuous, 0.0);
  std::vector<int> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = m.add_var(pre + "w_l(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
    LinearTerms row;
    row.add(y[i], 1.0);
    row.add(H.lam, -1.0);
    row.add(w[i], -1.0);
    m.add_row(pre + "wdef_l(" + std::to_string(i) + ")", std::move(row), Relation::LessEqual, 0.0);
  }
  H.s.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    H.s[kk] = m.add_var(pre + "s_l(" + std::to_string(kk) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
    const Vector c = data.row(kk);
    if (((c - lo).array() < -kTolFeas).any() || ((hi - c).array() < -kTolFeas).any())
      throw std::invalid_argument("leader sample " + std::to_string(kk) + " lies outside S");
    LinearTerms epi;
    for (int i = 0; i < n; ++i) {
      epi.add(y[i], c[i]);
      if (hi[i] - c[i] != 0.0) epi.add(w[i], hi[i] - c[i]);
    }
    epi.add(H.t, -1.0);
    epi.add(H.s[kk], -1.0);
    m.add_row(pre + "epi_l(" + std::to_string(kk) + ")", std::move(epi), Relation::LessEqual, 0.0);
  }
  return H;
}

inline FollowerPrimalHandles append_follower_primal_block_box(MilpModel& m,
                                                              const InterdictionInstance& inst,
                                                              const PolyhedralSupport& sup,
                                                              const SampleSet& data,
                                                              const DroConfig& cfg,
                                                              const XContext& x,
                                                              const std::string& pre) {
  const auto box = detect_box(sup);
  const auto& [lo, hi] = *box;
  const int n = inst.n, k = data.count();
  if (k < 1) throw std::invalid_argument("follower data set must contain at least one sample");
  FollowerPrimalHandles H;
  H.y.resize(n);
  for (int i = 0; i < n; ++i)
    H.y[i] = m.add_var(pre + "y(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  H.t = m.add_var(pre + "t_f", -kInf, kInf, VarKind::Continuous, 0.0);
  H.lam = m.add_var(pre + "lam_f", 0.0, kInf, VarKind::Continuous, 0.0);
  for (int j = 0; j < inst.d_f(); ++j) {
    LinearTerms row;
    for (int i = 0; i < n; ++i) row.add(H.y[i], inst.F(j, i));
    double rhs = inst.f[j];
    if (x.is_var()) {
      for (int i = 0; i < inst.m; ++i) row.add(x.vars[i], inst.L(j, i));
    } else {
      rhs -= inst.L.row(j).dot(x.value);
    }
    m.add_row(pre + "Y(" + std::to_string(j) + ")", std::move(row), Relation::LessEqual, rhs);
  }
  std::vector<int> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = m.add_var(pre + "w_f(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
    LinearTerms row;
    row.add(H.y[i], 1.0);
    row.add(H.lam, -1.0);
    row.add(w[i], -1.0);
    m.add_row(pre + "wdef_f(" + std::to_string(i) + ")", std::move(row), Relation::LessEqual, 0.0);
  }
  H.s.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    H.s[kk] = m.add_var(pre + "s_f(" + std::to_string(kk) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
    const Vector c = data.row(kk);
    if (((c - lo).array() < -kTolFeas).any() || ((hi - c).array() < -kTolFeas).any())
      throw std::invalid_argument("follower sample " + std::to_string(kk) + " lies outside S");
    LinearTerms epi;
    for (int i = 0; i < n; ++i) {
      epi.add(H.y[i], -c[i]);
      if (c[i] - lo[i] != 0.0) epi.add(w[i], c[i] - lo[i]);
    }
    epi.add(H.t, 1.0);
    epi.add(H.s[kk], -1.0);
    m.add_row(pre + "epi_f(" + std::to_string(kk) + ")", std::move(epi), Relation::LessEqual, 0.0);
  }
  return H;
}

struct FollowerDualHandles {
  std::vector<int> beta;                // one per row of F
  std::vector<int> gamma;               // one per sample
  std::vector<std::vector<int>> mu_up;  // [k][i]
  std::vector<std::vector<int>> mu_dn;
  std::vector<int> psi;  // per-sample envelope, present only for p = inf

  // dual objective (f - Lx)' beta at a constant x
  LinearTerms objective(const InterdictionInstance& inst, const Vector& xval) const {
    LinearTerms o;
    const Vector rhs = inst.f - inst.L * xval;
    for (std::size_t j = 0; j < beta.size(); ++j) o.add(beta[j], rhs[j]);
    return o;
  }
};

// Dual of the follower block: variables beta (polytope rows), gamma (sample
// weights) and mu (support rows), with
//   F' beta - sum_k gamma^(k) c^(k) + sum_k (mu_up - mu_dn)^(k) >= 0
//   gamma^(k) Delta^(k) + B (mu_up - mu_dn)^(k) >= 0
//   0 <= gamma <= 1/((1-a)k),  sum gamma = 1,
// and the norm budget on the mu variables. For p = 1 that budget is the plain
// sum; for p = inf it needs per-sample envelopes psi^(k) (the printed
// aggregated form is a relaxation and breaks strong duality).
inline FollowerDualHandles append_follower_dual_block(MilpModel& m,
                                                      const InterdictionInstance& inst,
                                                      const PolyhedralSupport& sup,
                                                      const SampleSet& data, const DroConfig& cfg,
                                                      const std::string& pre) {
  const int n = inst.n, dS = sup.num_rows(), k = data.count();
  if (k < 1) throw std::invalid_argument("follower data set must contain at least one sample");
  FollowerDualHandles H;
  const double gcap = 1.0 / ((1.0 - cfg.alpha_f) * k);
  H.beta.resize(inst.d_f());
  for (int j = 0; j < inst.d_f(); ++j)
    H.beta[j] = m.add_var(pre + "beta(" + std::to_string(j) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  H.gamma.resize(k);
  H.mu_up.resize(k);
  H.mu_dn.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    H.gamma[kk] = m.add_var(pre + "gamma(" + std::to_string(kk) + ")", 0.0, gcap,
                            VarKind::Continuous, 0.0);
    H.mu_up[kk].resize(n);
    H.mu_dn[kk].resize(n);
    for (int i = 0; i < n; ++i) {
      H.mu_up[kk][i] = m.add_var(pre + "mu_up(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                                 0.0, kInf, VarKind::Continuous, 0.0);
      H.mu_dn[kk][i] = m.add_var(pre + "mu_dn(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                                 0.0, kInf, VarKind::Continuous, 0.0);
    }
  }

  // stationarity wrt y
  for (int i = 0; i < n; ++i) {
    LinearTerms row;
    for (int j = 0; j < inst.d_f(); ++j)
      if (inst.F(j, i) != 0.0) row.add(H.beta[j], inst.F(j, i));
    for (int kk = 0; kk < k; ++kk) {
      row.add(H.gamma[kk], -data.samples(kk, i));
      row.add(H.mu_up[kk][i], 1.0);
      row.add(H.mu_dn[kk][i], -1.0);
    }
    m.add_row(pre + "dual_y(" + std::to_string(i) + ")", std::move(row), Relation::GreaterEqual, 0.0);
  }
  // stationarity wrt nu^(k)
  for (int kk = 0; kk < k; ++kk) {
    const Vector delta = slack_delta(sup, data.row(kk));
    if ((delta.array() < -kTolFeas).any())
      throw std::invalid_argument("follower sample " + std::to_string(kk) + " lies outside S");
    for (int r = 0; r < dS; ++r) {
      LinearTerms row;
      row.add(H.gamma[kk], delta[r]);
      for (int i = 0; i < n; ++i)
        if (sup.B(r, i) != 0.0) {
          row.add(H.mu_up[kk][i], sup.B(r, i));
          row.add(H.mu_dn[kk][i], -sup.B(r, i));
        }
      m.add_row(pre + "dual_nu(" + std::to_string(kk) + "," + std::to_string(r) + ")",
                std::move(row), Relation::GreaterEqual, 0.0);
    }
  }
  // sum gamma = 1
  {
    LinearTerms row;
    for (int kk = 0; kk < k; ++kk) row.add(H.gamma[kk], 1.0);
    m.add_row(pre + "dual_t", std::move(row), Relation::Equal, 1.0);
  }
  // norm budget from the lam column
  const double budget = cfg.eps_f / (1.0 - cfg.alpha_f);
  if (cfg.p == NormOrder::L1) {
    LinearTerms row;
    for (int kk = 0; kk < k; ++kk)
      for (int i = 0; i < n; ++i) {
        row.add(H.mu_up[kk][i], 1.0);
        row.add(H.mu_dn[kk][i], 1.0);
      }
    m.add_row(pre + "dual_lam", std::move(row), Relation::LessEqual, budget);
  } else {
    H.psi.resize(k);
    LinearTerms sum;
    for (int kk = 0; kk < k; ++kk) {
      H.psi[kk] = m.add_var(pre + "psi(" + std::to_string(kk) + ")", 0.0, kInf,
                            VarKind::Continuous, 0.0);
      for (int i = 0; i < n; ++i) {
        LinearTerms env;
        env.add(H.mu_up[kk][i], 1.0);
        env.add(H.mu_dn[kk][i], 1.0);
        env.add(H.psi[kk], -1.0);
        m.add_row(pre + "dual_env(" + std::to_string(kk) + "," + std::to_string(i) + ")",
                  std::move(env), Relation::LessEqual, 0.0);
      }
      sum.add(H.psi[kk], 1.0);
    }
    m.add_row(pre + "dual_lam", std::move(sum), Relation::LessEqual, budget);
  }
  return H;
}

// Compact follower dual (interval support, p = 1): the per-sample mu variables
// aggregate exactly into D = sum_k (mu_up - mu_dn)^(k) with interval bounds
// gated by gamma and a single l1 budget row.
inline FollowerDualHandles append_follower_dual_block_box(MilpModel& m,
                                                          const InterdictionInstance& inst,
                                                          const PolyhedralSupport& sup,
                                                          const SampleSet& data,
                                                          const DroConfig& cfg,
                                                          const std::string& pre) {
  const auto box = detect_box(sup);
  const auto& [lo, hi] = *box;
  const int n = inst.n, k = data.count();
  if (k < 1) throw std::invalid_argument("follower data set must contain at least one sample");
  FollowerDualHandles H;
  const double gcap = 1.0 / ((1.0 - cfg.alpha_f) * k);
  H.beta.resize(inst.d_f());
  for (int j = 0; j < inst.d_f(); ++j)
    H.beta[j] = m.add_var(pre + "beta(" + std::to_string(j) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  H.gamma.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    const Vector c = data.row(kk);
    if (((c - lo).array() < -kTolFeas).any() || ((hi - c).array() < -kTolFeas).any())
      throw std::invalid_argument("follower sample " + std::to_string(kk) + " lies outside S");
    H.gamma[kk] = m.add_var(pre + "gamma(" + std::to_string(kk) + ")", 0.0, gcap,
                            VarKind::Continuous, 0.0);
  }
  std::vector<int> D(n), a(n);
  for (int i = 0; i < n; ++i) {
    D[i] = m.add_var(pre + "Dmu(" + std::to_string(i) + ")", -kInf, kInf, VarKind::Continuous, 0.0);
    a[i] = m.add_var(pre + "Dabs(" + std::to_string(i) + ")", 0.0, kInf, VarKind::Continuous, 0.0);
  }
  for (int i = 0; i < n; ++i) {
    LinearTerms statr;
    for (int j = 0; j < inst.d_f(); ++j)
      if (inst.F(j, i) != 0.0) statr.add(H.beta[j], inst.F(j, i));
    for (int kk = 0; kk < k; ++kk) statr.add(H.gamma[kk], -data.samples(kk, i));
    statr.add(D[i], 1.0);
    m.add_row(pre + "dual_y(" + std::to_string(i) + ")", std::move(statr), Relation::GreaterEqual,
              0.0);
    LinearTerms dlo;
    dlo.add(D[i], 1.0);
    for (int kk = 0; kk < k; ++kk) {
      const double gap = hi[i] - data.samples(kk, i);
      if (gap != 0.0) dlo.add(H.gamma[kk], gap);
    }
    m.add_row(pre + "dual_nu_up(" + std::to_string(i) + ")", std::move(dlo),
              Relation::GreaterEqual, 0.0);
    LinearTerms dhi;
    dhi.add(D[i], 1.0);
    for (int kk = 0; kk < k; ++kk) {
      const double gap = data.samples(kk, i) - lo[i];
      if (gap != 0.0) dhi.add(H.gamma[kk], -gap);
    }
    m.add_row(pre + "dual_nu_dn(" + std::to_string(i) + ")", std::move(dhi), Relation::LessEqual,
              0.0);
    LinearTerms aup;
    aup.add(D[i], 1.0);
    aup.add(a[i], -1.0);
    m.add_row(pre + "dual_abs_up(" + std::to_string(i) + ")", std::move(aup), Relation::LessEqual,
              0.0);
    LinearTerms adn;
    adn.add(D[i], -1.0);
    adn.add(a[i], -1.0);
    m.add_row(pre + "dual_abs_dn(" + std::to_string(i) + ")", std::move(adn), Relation::LessEqual,
              0.0);
  }
  {
    LinearTerms row;
    for (int kk = 0; kk < k; ++kk) row.add(H.gamma[kk], 1.0);
    m.add_row(pre + "dual_t", std::move(row), Relation::Equal, 1.0);
  }
  {
    LinearTerms row;
    for (int i = 0; i < n; ++i) row.add(a[i], 1.0);
    m.add_row(pre + "dual_lam", std::move(row), Relation::LessEqual,
              cfg.eps_f / (1.0 - cfg.alpha_f));
  }
  return H;
}

// Style-dispatching wrappers.
inline LeaderCvarHandles append_leader_block_styled(MilpModel& m, const PolyhedralSupport& sup,
                                                    const SampleSet& data, const DroConfig& cfg,
                                                    const std::vector<int>& y,
                                                    const std::string& pre, FormulationStyle st) {
  return resolve_style(st, sup, cfg) == FormulationStyle::BoxCompact
             ? append_leader_cvar_block_box(m, sup, data, cfg, y, pre)
             : append_leader_cvar_block(m, sup, data, cfg, y, pre);
}
inline FollowerPrimalHandles append_follower_primal_styled(MilpModel& m,
                                                           const InterdictionInstance& inst,
                                                           const PolyhedralSupport& sup,
                                                           const SampleSet& data,
                                                           const DroConfig& cfg, const XContext& x,
                                                           const std::string& pre,
                                                           FormulationStyle st) {
  return resolve_style(st, sup, cfg) == FormulationStyle::BoxCompact
             ? append_follower_primal_block_box(m, inst, sup, data, cfg, x, pre)
             : append_follower_primal_block(m, inst, sup, data, cfg, x, pre);
}
inline FollowerDualHandles append_follower_dual_styled(MilpModel& m,
                                                       const InterdictionInstance& inst,
                                                       const PolyhedralSupport& sup,
                                                       const SampleSet& data, const DroConfig& cfg,
                                                       const std::string& pre,
                                                       FormulationStyle st) {
  return resolve_style(st, sup, cfg) == FormulationStyle::BoxCompact
             ? append_follower_dual_block_box(m, inst, sup, data, cfg, pre)
             : append_follower_dual_block(m, inst, sup, data, cfg, pre);
}

// ---- standalone follower LPs (fixed leader decision) -----------------------

struct FollowerLpHandles {
  MilpModel model;
  FollowerPrimalHandles primal;
  FollowerDualHandles dual;
  bool is_primal = true;
};

inline void require_x_in_X(const InterdictionInstance& inst, const Vector& x) {
  if (x.size() != inst.m) throw std::invalid_argument("leader decision has wrong dimension");
  for (int i = 0; i < inst.m; ++i)
    if (std::abs(x[i]) > kTolFeas && std::abs(x[i] - 1.0) > kTolFeas)
      throw std::invalid_argument("leader decision must be binary");
  if (((inst.H * x - inst.h).array() > 1e-7).any())
    throw std::invalid_argument("leader decision violates H x <= h");
}

inline FollowerLpHandles build_follower_primal(const InterdictionInstance& inst,
                                               const PolyhedralSupport& sup, const SampleSet& data_f,
                                               const DroConfig& cfg, const Vector& x) {
  cfg.check();
  require_x_in_X(inst, x);
  FollowerLpHandles H;
  H.model.sense = Sense::Maximize;
  XContext xc;
  xc.value = x;
  H.primal = append_follower_primal_block(H.model, inst, sup, data_f, cfg, xc, "");
  auto obj = H.primal.objective(cfg.alpha_f, cfg.eps_f, data_f.count());
  for (auto& [v, c] : obj.terms) H.model.add_obj(v, c);
  return H;
}

inline FollowerLpHandles build_follower_dual(const InterdictionInstance& inst,
                                             const PolyhedralSupport& sup, const SampleSet& data_f,
                                             const DroConfig& cfg, const Vector& x) {
  cfg.check();
  require_x_in_X(inst, x);
  FollowerLpHandles H;
  H.is_primal = false;
  H.model.sense = Sense::Minimize;
  H.dual = append_follower_dual_block(H.model, inst, sup, data_f, cfg, "");
  auto obj = H.dual.objective(inst, x);
  for (auto& [v, c] : obj.terms) H.model.add_obj(v, c);
  return H;
}

// ---- big-M ------------------------------------------------------------------

struct BigM {
  double value = 0.0;
  bool conservative = false;  // generic fallback bound, flagged in output
};

// Packing instances scaled as in the experiments (U = I, S within [0,1]^n)
// admit M = max{n, 1 + eps_f/(1-alpha_f)}; anything else gets a conservative
// bound from the support's coordinate range.
inline BigM derive_big_m_packing(const InterdictionInstance& inst, const PolyhedralSupport& sup,
                                 const DroConfig& cfg) {
  cfg.check();
  BigM out;
  const double tail = 1.0 + cfg.eps_f / (1.0 - cfg.alpha_f);
  const auto [lo, hi] = support_coordinate_range(sup);
  const bool unit_u = inst.packing_form && (inst.packing_form->U.array() == 1.0).all();
  const bool unit_support = (lo.array() >= -kTolFeas).all() && (hi.array() <= 1.0 + kTolFeas).all();
  if (unit_u && unit_support) {
    out.value = std::max(static_cast<double>(inst.n), tail);
    return out;
  }
  double cmax = 0.0;
  for (int i = 0; i < inst.n; ++i) cmax = std::max({cmax, std::abs(lo[i]), std::abs(hi[i])});
  out.value = std::max(1.0, cmax) * inst.n * tail;
  out.conservative = true;
  return out;
}

// ---- basic DRI MILP ---------------------------------------------------------

struct BasicDriHandles {
  MilpModel model;
  std::vector<int> x;
  LeaderCvarHandles leader;
  FollowerPrimalHandles fprimal;
  FollowerDualHandles fdual;
  std::vector<int> mccormick;  // products p, one per linearized (row, x) pair
  BigM big_m;
};

inline void add_leader_polytope(MilpModel& m, const InterdictionInstance& inst,
                                std::vector<int>& xvars) {
  xvars.resize(inst.m);
  for (int i = 0; i < inst.m; ++i)
    xvars[i] = m.add_var("x(" + std::to_string(i) + ")", 0.0, 1.0, VarKind::Binary, 0.0);
  for (int i = 0; i < inst.d_l(); ++i) {
    LinearTerms row;
    for (int j = 0; j < inst.m; ++j) row.add(xvars[j], inst.H(i, j));
    m.add_row("X(" + std::to_string(i) + ")", std::move(row), Relation::LessEqual, inst.h[i]);
  }
}

// Strong-duality row (dual objective == primal objective) for a follower
// block whose x enters (f - Lx)' beta; the x.beta products are McCormick
// linearized. Returns the product variable ids.
inline std::vector<int> add_strong_duality_row(MilpModel& m, const InterdictionInstance& inst,
                                               const DroConfig& cfg, const std::vector<int>& x,
                                               const FollowerPrimalHandles& fp,
                                               const FollowerDualHandles& fd, double big_m,
                                               const std::string& pre) {
  const int k = static_cast<int>(fp.s.size());
  LinearTerms row;
  std::vector<int> products;
  const int dt = inst.packing_form ? static_cast<int>(inst.packing_form->Ftilde.rows()) : -1;
  if (dt >= 0) {
    // (f - Lx)'beta = ftilde'beta1 + sum_i U_i (1 - x_i) beta2_i
    for (int j = 0; j < dt; ++j) row.add(fd.beta[j], inst.f[j]);
    for (int i = 0; i < inst.n; ++i) {
      const int b2 = fd.beta[dt + i];
      m.set_bounds(b2, 0.0, big_m);
      const int p = m.add_var(pre + "p(" + std::to_string(i) + ")", 0.0, big_m,
                              VarKind::Continuous, 0.0);
      add_mccormick(m, p, b2, x[i], big_m, pre + "mc(" + std::to_string(i) + ")");
      row.add(p, inst.packing_form->U[i]);
      products.push_back(p);
    }
  } else {
    for (int j = 0; j < inst.d_f(); ++j) {
      row.add(fd.beta[j], inst.f[j]);
      bool coupled = false;
      for (int i = 0; i < inst.m; ++i)
        if (inst.L(j, i) != 0.0) coupled = true;
      if (coupled) m.set_bounds(fd.beta[j], 0.0, big_m);
      for (int i = 0; i < inst.m; ++i) {
        if (inst.L(j, i) == 0.0) continue;
        // x_i * beta_j = beta_j - p_ji with p_ji = (1 - x_i) beta_j
        const int p = m.add_var(pre + "p(" + std::to_string(j) + "," + std::to_string(i) + ")",
                                0.0, big_m, VarKind::Continuous, 0.0);
        add_mccormick(m, p, fd.beta[j], x[i], big_m,
                      pre + "mc(" + std::to_string(j) + "," + std::to_string(i) + ")");
        row.add(fd.beta[j], -inst.L(j, i));
        row.add(p, inst.L(j, i));
        products.push_back(p);
      }
    }
  }
  // minus the primal objective t_f - (1/(1-a))(eps lam + (1/k) sum s)
  row.add(fp.t, -1.0);
  row.add(fp.lam, cfg.eps_f / (1.0 - cfg.alpha_f));
  for (int kk = 0; kk < k; ++kk) row.add(fp.s[kk], 1.0 / ((1.0 - cfg.alpha_f) * k));
  m.add_row(pre + "strong_duality", std::move(row), Relation::Equal, 0.0);
  return products;
}

// Exact row-prefix check of Assumption A3 through the canonical rendering.
inline bool nesting_holds(const SampleSet& data_l, const SampleSet& data_f) {
  if (data_f.count() > data_l.count() || data_f.dim() != data_l.dim()) return false;
  for (int k = 0; k < data_f.count(); ++k)
    for (int i = 0; i < data_f.dim(); ++i)
      if (render_double(data_f.samples(k, i)) != render_double(data_l.samples(k, i))) return false;
  return true;
}

inline BasicDriHandles build_basic_dri(const InterdictionInstance& inst,
                                       const PolyhedralSupport& sup, const SampleSet& data_l,
                                       const SampleSet& data_f, const DroConfig& cfg,
                                       bool enforce_nesting = true,
                                       FormulationStyle style = FormulationStyle::Literal) {
  cfg.check();
  if (enforce_nesting && !nesting_holds(data_l, data_f))
    throw std::invalid_argument("A3 violated: follower data is not a prefix of leader data");
  BasicDriHandles H;
  H.model.sense = Sense::Minimize;
  add_leader_polytope(H.model, inst, H.x);
  XContext xc;
  xc.vars = H.x;
  H.fprimal = append_follower_primal_styled(H.model, inst, sup, data_f, cfg, xc, "", style);
  H.leader = append_leader_block_styled(H.model, sup, data_l, cfg, H.fprimal.y, "", style);
  H.fdual = append_follower_dual_styled(H.model, inst, sup, data_f, cfg, "", style);
  H.big_m = derive_big_m_packing(inst, sup, cfg);
  H.mccormick =
      add_strong_duality_row(H.model, inst, cfg, H.x, H.fprimal, H.fdual, H.big_m.value, "");
  auto obj = H.leader.objective(cfg.alpha_l, cfg.eps_l, data_l.count());
  for (auto& [v, c] : obj.terms) H.model.add_obj(v, c);
  return H;
}

// ---- semi-pessimistic MILP --------------------------------------------------

struct SemiPessimisticHandles {
  MilpModel model;
  std::vector<int> x;
  int z = -1;
  std::vector<LeaderCvarHandles> leader;      // per scenario
  std::vector<FollowerPrimalHandles> fprimal;  // per scenario
  std::vector<FollowerDualHandles> fdual;
  BigM big_m;
};

inline SemiPessimisticHandles build_semi_pessimistic(const InterdictionInstance& inst,
                                                     const PolyhedralSupport& sup,
                                                     const SampleSet& data_l,
                                                     const std::vector<SampleSet>& scenarios,
                                                     const DroConfig& cfg,
                                                     FormulationStyle style = FormulationStyle::Literal) {
  cfg.check();
  if (scenarios.empty()) throw std::invalid_argument("scenario list is empty");
  SemiPessimisticHandles H;
  H.model.sense = Sense::Minimize;
  add_leader_polytope(H.model, inst, H.x);
  H.z = H.model.add_var("z", -kInf, kInf, VarKind::Continuous, 1.0);
  H.big_m = derive_big_m_packing(inst, sup, cfg);
  const int kl = data_l.count();
  for (std::size_t r = 0; r < scenarios.size(); ++r) {
    const std::string pre = "r" + std::to_string(r) + ":";
    XContext xc;
    xc.vars = H.x;
    auto fp = append_follower_primal_styled(H.model, inst, sup, scenarios[r], cfg, xc, pre, style);
    auto ld = append_leader_block_styled(H.model, sup, data_l, cfg, fp.y, pre, style);
    auto fd = append_follower_dual_styled(H.model, inst, sup, scenarios[r], cfg, pre, style);
    add_strong_duality_row(H.model, inst, cfg, H.x, fp, fd, H.big_m.value, pre);
    LinearTerms epi = ld.objective(cfg.alpha_l, cfg.eps_l, kl);
    epi.add(H.z, -1.0);
    H.model.add_row(pre + "z_bound", std::move(epi), Relation::LessEqual, 0.0);
    H.leader.push_back(std::move(ld));
    H.fprimal.push_back(std::move(fp));
    H.fdual.push_back(std::move(fd));
  }
  return H;
}

}  // namespace dri
