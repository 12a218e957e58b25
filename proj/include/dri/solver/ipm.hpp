#pragma once

// Homogeneous self-dual interior-point solver for LPs in computational form
//   min c'x  s.t.  A x = b,  l <= x <= u.
//
// The embedding (Andersen-Andersen style, with bounds kept implicit) carries
// (x, y, z, w, tau, kappa) with slacks g = x - l*tau, t = u*tau - x and
// complementarity g.z = t.w = tau*kappa = 0. It converges on feasible LPs
// whose feasible set has empty relative interior (where plain infeasible-start
// Mehrotra stalls) and exposes infeasibility/unboundedness certificates via
// tau -> 0, kappa > 0. Newton directions come from the bordered system
//   [ -(Theta+dp I)  A' ] [dx]   [r1]          (plus the tau border,
//   [       A       dd I] [dy] = [r2]           handled by two solves)
// factored once per iteration with Eigen's SimplicialLDLT; the sparsity
// pattern is constant across iterations and bound changes, so the symbolic
// analysis is shared across a branch-and-bound tree.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace dri::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct Problem {
  SpMat A;  // m x n, compressed
  Vec b, c, lb, ub;
  double c0 = 0.0;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
};

enum class LpStatus { Optimal, PrimalInfeasible, DualInfeasible, IterLimit, NumericalFailure };

struct Result {
  LpStatus status = LpStatus::NumericalFailure;
  Vec x, y, z, w;
  double obj = std::numeric_limits<double>::quiet_NaN();
  int iters = 0;
  double rel_pinf = kInf, rel_dinf = kInf, rel_gap = kInf;
};

struct IpmOptions {
  double tol_p = 1e-9;
  double tol_d = 1e-9;
  double tol_gap = 1e-9;
  // Degenerate LPs may stall just above the strict targets; the best iterate
  // is accepted at these relaxed bounds instead of failing.
  double tol_p_relaxed = 2e-7;
  double tol_d_relaxed = 2e-7;
  double tol_gap_relaxed = 5e-7;
  double tol_infeas = 1e-10;  // tau/kappa ratio certifying infeasibility
  int max_iters = 200;
};

class IpmSolver {
 public:
  explicit IpmSolver(const Problem& prob) : p_(prob) {
    n_ = p_.cols();
    m_ = p_.rows();
    At_ = SpMat(p_.A.transpose());
    build_pattern();
  }

  void set_bounds(const Vec& lb, const Vec& ub) {
    p_.lb = lb;
    p_.ub = ub;
  }
  void set_cost(const Vec& c) { p_.c = c; }
  const Problem& problem() const { return p_; }

  Result solve(const IpmOptions& opt = {}) {
    Result res;
    classify();

    // Effective data with fixed columns folded into the right-hand side.
    Vec beff = p_.b;
    double c0_fix = 0.0;
    for (int j = 0; j < n_; ++j)
      if (fixed_[j]) {
        if (p_.lb[j] != 0.0) beff -= p_.lb[j] * p_.A.col(j);
        c0_fix += p_.c[j] * p_.lb[j];
      }

    const double bnorm = 1.0 + beff.lpNorm<Eigen::Infinity>();
    const double cnorm = 1.0 + p_.c.lpNorm<Eigen::Infinity>();

    Vec x(n_), g = Vec::Zero(n_), t = Vec::Zero(n_), z = Vec::Zero(n_), w = Vec::Zero(n_);
    Vec y = Vec::Zero(m_);
    double tau = 1.0, kappa = 1.0;
    int ncomp = 1;
    for (int j = 0; j < n_; ++j) ncomp += (has_lo_[j] ? 1 : 0) + (has_up_[j] ? 1 : 0);
    starting_point(x, g, t, z, w);

    Vec rP(m_), rD(n_), hatD(n_);
    Vec dx(n_), dy(m_), dz(n_), dw(n_);
    Vec dxa(n_), dza(n_), dwa(n_);
    Vec p1(n_), q1(m_), p2(n_), q2(m_);
    double best_resid = kInf, best_p = kInf, best_d = kInf, best_gap = kInf, best_obj = 0.0;
    Vec best_x, best_y, best_z, best_w;
    int stall = 0;

    auto accept_best = [&](Result& r) {
      if (best_p <= opt.tol_p_relaxed && best_d <= opt.tol_d_relaxed &&
          best_gap <= opt.tol_gap_relaxed) {
        r.rel_pinf = best_p;
        r.rel_dinf = best_d;
        r.rel_gap = best_gap;
        finish(r, best_x, best_y, best_z, best_w, c0_fix, LpStatus::Optimal);
        return true;
      }
      return false;
    };

    for (int it = 0; it < opt.max_iters; ++it) {
      res.iters = it;
      // residuals of the homogeneous model
      rP = beff * tau - p_.A * mask_fixed(x);
      rD = p_.c * tau - At_ * y;
      for (int j = 0; j < n_; ++j) {
        if (fixed_[j]) {
          rD[j] = 0.0;
          continue;
        }
        if (has_lo_[j]) rD[j] -= z[j];
        if (has_up_[j]) rD[j] += w[j];
      }
      double dual_off = 0.0;  // b'y + l'z - u'w
      for (int j = 0; j < n_; ++j) {
        if (fixed_[j]) continue;
        if (has_lo_[j] && p_.lb[j] != 0.0) dual_off += p_.lb[j] * z[j];
        if (has_up_[j] && p_.ub[j] != 0.0) dual_off -= p_.ub[j] * w[j];
      }
      const double cx = dot_free(p_.c, x);
      const double by = beff.dot(y);
      const double rG = kappa + cx - by - dual_off;

      double mu = tau * kappa;
      for (int j = 0; j < n_; ++j) {
        if (has_lo_[j]) mu += g[j] * z[j];
        if (has_up_[j]) mu += t[j] * w[j];
      }
      mu /= ncomp;

      // scaled (original-problem) convergence measures
      const double pobj = cx / tau;
      const double dobj = (by + dual_off) / tau;
      res.rel_pinf = rP.lpNorm<Eigen::Infinity>() / (tau * bnorm);
      res.rel_dinf = max_abs_free(rD) / (tau * cnorm);
      res.rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

      if (res.rel_pinf <= opt.tol_p && res.rel_dinf <= opt.tol_d && res.rel_gap <= opt.tol_gap) {
        finish_scaled(res, x, y, z, w, tau, c0_fix, LpStatus::Optimal);
        return res;
      }
      // infeasibility certificates: tau -> 0 with kappa bounded away
      if (tau <= opt.tol_infeas * std::max(1.0, kappa) && mu <= 1e-8) {
        const double cert_d = by + dual_off;  // > 0: primal infeasible
        if (cert_d > 1e-9 * cnorm && cert_d >= std::abs(cx) * 1e-3) {
          finish_scaled(res, x, y, z, w, 1.0, c0_fix, LpStatus::PrimalInfeasible);
          return res;
        }
        if (cx < -1e-9 * bnorm) {
          finish_scaled(res, x, y, z, w, 1.0, c0_fix, LpStatus::DualInfeasible);
          return res;
        }
        finish_scaled(res, x, y, z, w, std::max(tau, 1e-300), c0_fix,
                      LpStatus::NumericalFailure);
        return res;
      }

      const double resid = std::max({res.rel_pinf, res.rel_dinf, res.rel_gap});
      const bool improved = resid < best_resid * 0.999;
      if (resid < best_resid) {
        best_resid = resid;
        best_p = res.rel_pinf;
        best_d = res.rel_dinf;
        best_gap = res.rel_gap;
        best_x = x / tau;
        best_y = y / tau;
        best_z = z / tau;
        best_w = w / tau;
        best_obj = pobj;
      }
      if (improved) {
        stall = 0;
      } else if (++stall > 15) {
        if (accept_best(res)) return res;
        finish_scaled(res, x, y, z, w, tau, c0_fix, LpStatus::NumericalFailure);
        return res;
      }

      if (!factorize(g, t, z, w)) {
        if (accept_best(res)) return res;
        finish_scaled(res, x, y, z, w, tau, c0_fix, LpStatus::NumericalFailure);
        return res;
      }

      // border vector solve: (p2, q2) = K^{-1} [phi - c; -b]
      Vec phi = Vec::Zero(n_);
      double psi = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (fixed_[j]) continue;
        if (has_lo_[j]) {
          const double th = z[j] / g[j];
          phi[j] += th * p_.lb[j];
          psi += th * p_.lb[j] * p_.lb[j];
        }
        if (has_up_[j]) {
          const double th = w[j] / t[j];
          phi[j] += th * p_.ub[j];
          psi += th * p_.ub[j] * p_.ub[j];
        }
      }
      solve_kkt(phi - p_.c, -beff, p2, q2);
      const double border = dot_free(p_.c + phi, p2) - beff.dot(q2) + psi + kappa / tau;
      if (!(border > 1e-300) || !std::isfinite(border)) {
        if (accept_best(res)) return res;
        finish_scaled(res, x, y, z, w, tau, c0_fix, LpStatus::NumericalFailure);
        return res;
      }

      // --- affine direction ---
      double dtau_a;
      hsd_direction(beff, rP, rD, rG, g, t, z, w, tau, kappa, phi, border, nullptr, nullptr,
                    nullptr, 0.0, p2, q2, p1, q1, dxa, dza, dwa, dtau_a);
      double dkap_a = -(kappa * dtau_a) / tau - kappa;
      dkap_aff_ = dkap_a;
      double alpha_a = step_length(g, t, z, w, tau, kappa, dxa, dza, dwa, dtau_a, dkap_a,
                                   p_.lb, p_.ub);
      double mu_aff = (tau + alpha_a * dtau_a) * (kappa + alpha_a * dkap_a);
      for (int j = 0; j < n_; ++j) {
        if (has_lo_[j])
          mu_aff += (g[j] + alpha_a * (dxa[j] - p_.lb[j] * dtau_a)) * (z[j] + alpha_a * dza[j]);
        if (has_up_[j])
          mu_aff += (t[j] + alpha_a * (p_.ub[j] * dtau_a - dxa[j])) * (w[j] + alpha_a * dwa[j]);
      }
      mu_aff = std::max(mu_aff / ncomp, 0.0);
      const double sigma = std::pow(std::min(1.0, mu_aff / std::max(mu, 1e-300)), 3);

      // --- corrector direction ---
      double dtau;
      hsd_direction(beff, rP, rD, rG, g, t, z, w, tau, kappa, phi, border, &dxa, &dza, &dwa,
                    sigma * mu, p2, q2, p1, q1, dx, dz, dw, dtau);
      const double corr_tk = sigma * mu - dtau_a * dkap_a;
      double dkap = (corr_tk - kappa * dtau) / tau - kappa;
      double alpha =
          step_length(g, t, z, w, tau, kappa, dx, dz, dw, dtau, dkap, p_.lb, p_.ub);
      alpha = std::min(1.0, 0.99 * alpha);

      for (int j = 0; j < n_; ++j) {
        if (fixed_[j]) continue;
        x[j] += alpha * dx[j];
        if (has_lo_[j]) {
          g[j] += alpha * (dx[j] - p_.lb[j] * dtau);
          z[j] += alpha * dz[j];
        }
        if (has_up_[j]) {
          t[j] += alpha * (p_.ub[j] * dtau - dx[j]);
          w[j] += alpha * dw[j];
        }
      }
      Vec dyv = q1;
      y += alpha * dyv;
      tau += alpha * dtau;
      kappa += alpha * dkap;
    }
    if (accept_best(res)) return res;
    res.status = LpStatus::IterLimit;
    res.x = best_x;
    res.y = best_y;
    res.obj = best_obj + p_.c0 + c0_fix;
    return res;
  }

 private:
  void classify() {
    has_lo_.assign(n_, false);
    has_up_.assign(n_, false);
    fixed_.assign(n_, false);
    for (int j = 0; j < n_; ++j) {
      const bool lo = p_.lb[j] > -kInf, up = p_.ub[j] < kInf;
      if (lo && up && p_.ub[j] - p_.lb[j] < 1e-12) {
        fixed_[j] = true;
      } else {
        has_lo_[j] = lo;
        has_up_[j] = up;
      }
    }
  }

  // Newton direction of the homogeneous KKT system given complementarity
  // targets (sigma*mu with optional Mehrotra second-order corrections from the
  // affine direction). Residual reduction uses the full (undamped) residuals.
  void hsd_direction(const Vec& beff, const Vec& rP, const Vec& rD, double rG, const Vec& g,
                     const Vec& t, const Vec& z, const Vec& w, double tau, double kappa,
                     const Vec& phi, double border, const Vec* dxa, const Vec* dza, const Vec* dwa,
                     double smu, const Vec& p2, const Vec& q2, Vec& p1, Vec& q1, Vec& dx, Vec& dz,
                     Vec& dw, double& dtau) {
    // complementarity targets
    // g.z: smu - g z - corr ; t.w: smu - t w - corr ; tau kappa analogous
    Vec r1(n_);
    double constG = 0.0;  // l'rz - u'rw
    for (int j = 0; j < n_; ++j) {
      if (fixed_[j]) {
        r1[j] = 0.0;
        continue;
      }
      double v = rD[j];
      if (has_lo_[j]) {
        double tgt = smu - (dxa && dza ? ((*dxa)[j] - p_.lb[j] * dtau_aff_) * (*dza)[j] : 0.0);
        const double rz = tgt / g[j] - z[j];
        v -= rz;
        constG += p_.lb[j] * rz;
      }
      if (has_up_[j]) {
        double tgt = smu - (dxa && dwa ? (p_.ub[j] * dtau_aff_ - (*dxa)[j]) * (*dwa)[j] : 0.0);
        const double rw = tgt / t[j] - w[j];
        v += rw;
        constG -= p_.ub[j] * rw;
      }
      r1[j] = v;
    }
    const double corr_tk = smu - (dxa ? dtau_aff_ * dkap_aff_ : 0.0);
    const double rhsG = rG - constG + corr_tk / tau - kappa;

    solve_kkt(r1, rP, p1, q1);
    dtau = (rhsG + dot_free(p_.c + phi, p1) - beff.dot(q1)) / border;
    dx = p1 - dtau * p2;
    q1 -= dtau * q2;  // -> dy stored in q1
    for (int j = 0; j < n_; ++j) {
      dz[j] = 0.0;
      dw[j] = 0.0;
      if (fixed_[j]) continue;
      const double dg = dx[j] - p_.lb[j] * dtau;
      const double dt = p_.ub[j] * dtau - dx[j];
      if (has_lo_[j]) {
        double tgt = smu - (dxa && dza ? ((*dxa)[j] - p_.lb[j] * dtau_aff_) * (*dza)[j] : 0.0);
        dz[j] = (tgt - g[j] * z[j]) / g[j] - (z[j] / g[j]) * dg;
      }
      if (has_up_[j]) {
        double tgt = smu - (dxa && dwa ? (p_.ub[j] * dtau_aff_ - (*dxa)[j]) * (*dwa)[j] : 0.0);
        dw[j] = (tgt - t[j] * w[j]) / t[j] - (w[j] / t[j]) * dt;
      }
    }
    if (!dxa) dtau_aff_ = dtau;  // stash for the corrector pass
  }

  static double ratio_cap(double v, double dv, double cap) {
    return dv < 0.0 ? std::min(cap, -v / dv) : cap;
  }

  double step_length(const Vec& g, const Vec& t, const Vec& z, const Vec& w, double tau,
                     double kappa, const Vec& dx, const Vec& dz, const Vec& dw, double dtau,
                     double dkap, const Vec& lb, const Vec& ub) const {
    double a = 1.0;
    for (int j = 0; j < n_; ++j) {
      if (fixed_[j]) continue;
      if (has_lo_[j]) {
        a = ratio_cap(g[j], dx[j] - lb[j] * dtau, a);
        a = ratio_cap(z[j], dz[j], a);
      }
      if (has_up_[j]) {
        a = ratio_cap(t[j], ub[j] * dtau - dx[j], a);
        a = ratio_cap(w[j], dw[j], a);
      }
    }
    a = ratio_cap(tau, dtau, a);
    a = ratio_cap(kappa, dkap, a);
    return a;
  }

  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n_ + m_ + p_.A.nonZeros());
    for (int j = 0; j < n_; ++j) trips.emplace_back(j, j, -1.0);
    for (int k = 0; k < p_.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(p_.A, k); it; ++it)
        trips.emplace_back(n_ + it.row(), it.col(), it.value());
    for (int i = 0; i < m_; ++i) trips.emplace_back(n_ + i, n_ + i, 1.0);
    K_.resize(n_ + m_, n_ + m_);
    K_.setFromTriplets(trips.begin(), trips.end());
    K_.makeCompressed();
    ldlt_.analyzePattern(K_);

    diag_pos_.resize(n_ + m_);
    for (int col = 0; col < K_.outerSize(); ++col)
      for (SpMat::InnerIterator it(K_, col); it; ++it)
        if (it.row() == col) diag_pos_[col] = static_cast<int>(&it.value() - K_.valuePtr());
    a_pos_.clear();
    a_pos_.reserve(p_.A.nonZeros());
    for (int k = 0; k < p_.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(p_.A, k); it; ++it) {
        const int col = static_cast<int>(it.col());
        for (SpMat::InnerIterator kt(K_, col); kt; ++kt)
          if (kt.row() == n_ + it.row()) {
            a_pos_.push_back(static_cast<int>(&kt.value() - K_.valuePtr()));
            break;
          }
      }
  }

  bool factorize(const Vec& g, const Vec& t, const Vec& z, const Vec& w) {
    double* val = K_.valuePtr();
    int pos = 0;
    for (int k = 0; k < p_.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(p_.A, k); it; ++it) {
        val[a_pos_[pos]] = fixed_[it.col()] ? 0.0 : it.value();
        ++pos;
      }
    for (int j = 0; j < n_; ++j) {
      double d = reg_p_;
      if (fixed_[j]) {
        d = 1.0;
      } else {
        if (has_lo_[j]) d += z[j] / std::max(g[j], 1e-300);
        if (has_up_[j]) d += w[j] / std::max(t[j], 1e-300);
      }
      val[diag_pos_[j]] = -d;
    }
    for (int i = 0; i < m_; ++i) val[diag_pos_[n_ + i]] = reg_d_;
    for (int attempt = 0; attempt < 3; ++attempt) {
      ldlt_.factorize(K_);
      if (ldlt_.info() == Eigen::Success) return true;
      for (int j = 0; j < n_; ++j) val[diag_pos_[j]] -= 1e-8 * (attempt + 1);
      for (int i = 0; i < m_; ++i) val[diag_pos_[n_ + i]] += 1e-8 * (attempt + 1);
    }
    return false;
  }

  void solve_kkt(const Vec& r1, const Vec& r2, Vec& dx, Vec& dy) {
    Vec rhs(n_ + m_);
    rhs.head(n_) = r1;
    rhs.tail(m_) = r2;
    for (int j = 0; j < n_; ++j)
      if (fixed_[j]) rhs[j] = 0.0;
    Vec sol = ldlt_.solve(rhs);
    Vec resid = rhs - K_.selfadjointView<Eigen::Lower>() * sol;
    sol += ldlt_.solve(resid);
    dx = sol.head(n_);
    dy = sol.tail(m_);
    for (int j = 0; j < n_; ++j)
      if (fixed_[j]) dx[j] = 0.0;
  }

  void starting_point(Vec& x, Vec& g, Vec& t, Vec& z, Vec& w) {
    for (int j = 0; j < n_; ++j) {
      if (fixed_[j]) {
        x[j] = 0.0;
        continue;
      }
      const double lo = p_.lb[j], up = p_.ub[j];
      if (has_lo_[j] && has_up_[j]) {
        x[j] = 0.5 * (lo + up);
      } else if (has_lo_[j]) {
        x[j] = lo + 1.0;
      } else if (has_up_[j]) {
        x[j] = up - 1.0;
      } else {
        x[j] = 0.0;
      }
      g[j] = has_lo_[j] ? x[j] - lo : 0.0;
      t[j] = has_up_[j] ? up - x[j] : 0.0;
      z[j] = has_lo_[j] ? 1.0 : 0.0;
      w[j] = has_up_[j] ? 1.0 : 0.0;
    }
  }

  Vec mask_fixed(const Vec& x) const {
    Vec v = x;
    for (int j = 0; j < n_; ++j)
      if (fixed_[j]) v[j] = 0.0;
    return v;
  }
  double dot_free(const Vec& a, const Vec& x) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j)
      if (!fixed_[j]) s += a[j] * x[j];
    return s;
  }
  double max_abs_free(const Vec& v) const {
    double r = 0.0;
    for (int j = 0; j < n_; ++j)
      if (!fixed_[j]) r = std::max(r, std::abs(v[j]));
    return r;
  }

  void finish_scaled(Result& res, const Vec& x, const Vec& y, const Vec& z, const Vec& w,
                     double tau, double c0_fix, LpStatus st) {
    finish(res, x / tau, y / tau, z / tau, w / tau, c0_fix, st);
  }
  void finish(Result& res, const Vec& x, const Vec& y, const Vec& z, const Vec& w, double c0_fix,
              LpStatus st) {
    res.status = st;
    res.x = x;
    for (int j = 0; j < n_; ++j)
      if (fixed_[j]) res.x[j] = p_.lb[j];
    res.y = y;
    res.z = z;
    res.w = w;
    res.obj = dot_free(p_.c, x) + p_.c0 + c0_fix;
  }

  Problem p_;
  SpMat At_;
  int n_ = 0, m_ = 0;
  SpMat K_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
  std::vector<int> diag_pos_, a_pos_;
  std::vector<bool> has_lo_, has_up_, fixed_;
  double reg_p_ = 1e-9, reg_d_ = 1e-9;
  double dtau_aff_ = 0.0, dkap_aff_ = 0.0;
};

}  // namespace dri::lp
