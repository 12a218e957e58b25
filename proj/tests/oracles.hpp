#pragma once

// Test-only oracles, independent of the single-level reformulation path:
// exhaustive leader enumeration composed with follower LPs, a two-stage
// optimistic tie-break, discrete worst-case-expectation transport LPs, and a
// CVaR breakpoint scan.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <dri/instance.hpp>
#include <dri/reformulation.hpp>
#include <dri/solve.hpp>

namespace oracles {

using dri::Matrix;
using dri::Vector;

inline std::vector<Vector> enumerate_X(const dri::InterdictionInstance& inst) {
  std::vector<Vector> out;
  for (long mask = 0; mask < (1L << inst.m); ++mask) {
    Vector x(inst.m);
    for (int j = 0; j < inst.m; ++j) x[j] = (mask >> j) & 1 ? 1.0 : 0.0;
    if (((inst.H * x - inst.h).array() <= 1e-9).all()) out.push_back(x);
  }
  return out;
}

inline double follower_value(const dri::InterdictionInstance& inst,
                             const dri::PolyhedralSupport& sup, const dri::SampleSet& data_f,
                             const dri::DroConfig& cfg, const Vector& x) {
  auto h = dri::build_follower_primal(inst, sup, data_f, cfg, x);
  auto s = dri::solve(h.model);
  if (s.status != dri::SolveStatus::Optimal) throw std::runtime_error("follower LP not optimal");
  return s.objective;
}

// Leader's worst-case CVaR at the optimistic follower response for fixed x:
// stage 1 computes the follower value, stage 2 minimizes the leader objective
// over the follower's near-optimal set.
inline double composed_leader_value(const dri::InterdictionInstance& inst,
                                    const dri::PolyhedralSupport& sup, const dri::SampleSet& data_l,
                                    const dri::SampleSet& data_f, const dri::DroConfig& cfg,
                                    const Vector& x, Vector* y_out = nullptr) {
  const double vf = follower_value(inst, sup, data_f, cfg, x);
  dri::MilpModel m;
  m.sense = dri::Sense::Minimize;
  dri::XContext xc;
  xc.value = x;
  auto fp = dri::append_follower_primal_block(m, inst, sup, data_f, cfg, xc, "");
  auto lead = dri::append_leader_cvar_block(m, sup, data_l, cfg, fp.y, "");
  dri::LinearTerms opt = fp.objective(cfg.alpha_f, cfg.eps_f, data_f.count());
  m.add_row("fopt", std::move(opt), dri::Relation::GreaterEqual,
            vf - 1e-9 * (1.0 + std::abs(vf)));
  auto obj = lead.objective(cfg.alpha_l, cfg.eps_l, data_l.count());
  for (auto& [v, c] : obj.terms) m.add_obj(v, c);
  auto s = dri::solve(m);
  if (s.status != dri::SolveStatus::Optimal) throw std::runtime_error("composition LP not optimal");
  if (y_out) {
    y_out->resize(inst.n);
    for (int i = 0; i < inst.n; ++i) (*y_out)[i] = s.primal[fp.y[i]];
  }
  return s.objective;
}

// Exhaustive-x oracle for the basic model.
inline std::pair<Vector, double> basic_dri_by_enumeration(const dri::InterdictionInstance& inst,
                                                          const dri::PolyhedralSupport& sup,
                                                          const dri::SampleSet& data_l,
                                                          const dri::SampleSet& data_f,
                                                          const dri::DroConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  Vector bestx;
  for (const auto& x : enumerate_X(inst)) {
    const double v = composed_leader_value(inst, sup, data_l, data_f, cfg, x);
    if (v < best - 1e-12) {
      best = v;
      bestx = x;
    }
  }
  return {bestx, best};
}

// Exhaustive-x oracle for the scenario MILP: min over x of max over r of the
// per-(x, r) optimistic leader value.
inline double semi_pessimistic_by_enumeration(const dri::InterdictionInstance& inst,
                                              const dri::PolyhedralSupport& sup,
                                              const dri::SampleSet& data_l,
                                              const std::vector<dri::SampleSet>& scenarios,
                                              const dri::DroConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : enumerate_X(inst)) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& sc : scenarios)
      worst = std::max(worst, composed_leader_value(inst, sup, data_l, sc, cfg, x));
    best = std::min(best, worst);
  }
  return best;
}

// Exact discrete-transport oracle for the follower's worst-case expectation
// (alpha = 0) over a gridded support: min over distributions Q on the grid
// within Wasserstein distance eps of the empirical distribution of E_Q[c'y].
inline double worst_case_expectation_grid(const Matrix& grid, const dri::SampleSet& data,
                                          const Vector& y, double eps, dri::NormOrder p) {
  const int g = static_cast<int>(grid.rows());
  const int k = data.count();
  dri::MilpModel m;
  m.sense = dri::Sense::Minimize;
  // transport plan pi(k, j) >= 0, sum_j pi(k, j) = 1/k,
  // sum_{k,j} pi(k,j) ||c_j - chat_k|| <= eps, objective sum pi(k,j) c_j'y.
  std::vector<std::vector<int>> pi(k, std::vector<int>(g));
  dri::LinearTerms cost;
  for (int kk = 0; kk < k; ++kk)
    for (int j = 0; j < g; ++j) {
      const double obj = grid.row(j).dot(y);
      pi[kk][j] = m.add_var("pi(" + std::to_string(kk) + "," + std::to_string(j) + ")", 0.0,
                            dri::kInf, dri::VarKind::Continuous, obj);
      Vector diff = grid.row(j).transpose() - data.row(kk);
      const double dist = p == dri::NormOrder::L1 ? diff.lpNorm<1>() : diff.lpNorm<Eigen::Infinity>();
      cost.add(pi[kk][j], dist);
    }
  for (int kk = 0; kk < k; ++kk) {
    dri::LinearTerms row;
    for (int j = 0; j < g; ++j) row.add(pi[kk][j], 1.0);
    m.add_row("mass(" + std::to_string(kk) + ")", std::move(row), dri::Relation::Equal,
              1.0 / static_cast<double>(k));
  }
  m.add_row("budget", std::move(cost), dri::Relation::LessEqual, eps);
  auto s = dri::solve(m);
  if (s.status != dri::SolveStatus::Optimal) throw std::runtime_error("transport LP not optimal");
  return s.objective;
}

// CVaR by scanning the Rockafellar-Uryasev objective over sample breakpoints.
inline double cvar_right_breakpoints(const std::vector<double>& z, double alpha) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : z) {
    double acc = 0.0;
    for (double v : z) acc += std::max(v - t, 0.0);
    best = std::min(best, t + acc / ((1.0 - alpha) * static_cast<double>(z.size())));
  }
  return best;
}

}  // namespace oracles
