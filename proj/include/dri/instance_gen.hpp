#pragma once

// Random packing-interdiction instances and the scaled truncated-normal
// data-generating distribution used by the experiments.

#include <stdexcept>

#include "dri/instance.hpp"
#include "dri/rng.hpp"

namespace dri {

// H and F~ uniform on [0.01, 1], right-hand sides at 40% of the row sums,
// unit interdiction bounds.
inline InterdictionInstance gen_packing_instance(int n, int d_l, int d_tilde_f, Rng& rng) {
  if (n < 1 || d_l < 1 || d_tilde_f < 1) throw std::invalid_argument("bad instance dimensions");
  Matrix H(d_l, n), Ft(d_tilde_f, n);
  for (int i = 0; i < d_l; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = rng.uniform(0.01, 1.0);
  for (int i = 0; i < d_tilde_f; ++i)
    for (int j = 0; j < n; ++j) Ft(i, j) = rng.uniform(0.01, 1.0);
  const Vector h = 0.4 * H.rowwise().sum();
  const Vector ft = 0.4 * Ft.rowwise().sum();
  return InterdictionInstance::packing(H, h, Ft, ft, Vector::Ones(n));
}

inline PolyhedralSupport unit_support(int n) {
  return PolyhedralSupport::from_intervals(Vector::Constant(n, 0.01), Vector::Ones(n));
}

// Follower set replaced by the unimodular budget polytope
// { y >= 0 : sum y <= floor(0.2 n), y <= U(1-x) }.
inline InterdictionInstance with_unimodular_follower(const InterdictionInstance& inst,
                                                     int budget = -1) {
  if (budget < 0) budget = std::max(1, inst.n / 5);
  Matrix Ft(1, inst.n);
  Ft.setOnes();
  Vector ft(1);
  ft << static_cast<double>(budget);
  return InterdictionInstance::packing(inst.H, inst.h, Ft, ft, Vector::Ones(inst.n));
}

enum class VarianceMode { Proportional, Inverse };

// Coordinate i: normal with mean 0.5 i/(n+1) and the experiments' standard
// deviation profile, truncated to [0,1] by rejection, then mapped affinely to
// [0.01, 1]. Coordinates are independent.
struct TruncNormalSampler {
  Vector mu, sigma;

  static TruncNormalSampler make(int n, VarianceMode mode) {
    TruncNormalSampler s;
    s.mu.resize(n);
    s.sigma.resize(n);
    for (int i = 1; i <= n; ++i) {
      s.mu[i - 1] = 0.5 * i / (n + 1.0);
      const double ramp = 0.4 * i / (n + 1.0);
      s.sigma[i - 1] = mode == VarianceMode::Proportional ? 0.05 + ramp : 0.05 + (0.4 - ramp);
    }
    return s;
  }

  Vector draw(Rng& rng) const {
    Vector c(mu.size());
    for (int i = 0; i < mu.size(); ++i)
      c[i] = 0.01 + 0.99 * rng.truncated_normal(mu[i], sigma[i], 0.0, 1.0);
    return c;
  }

  Matrix draw_many(int count, Rng& rng) const {
    Matrix m(count, mu.size());
    for (int k = 0; k < count; ++k) m.row(k) = draw(rng).transpose();
    return m;
  }

  // Mean of the mapped truncated normal, for Monte-Carlo cross-checks.
  double mapped_mean(int i) const {
    auto phi = [](double v) { return std::exp(-0.5 * v * v) / 2.5066282746310005024; };
    auto Phi = [](double v) { return 0.5 * std::erfc(-v / 1.4142135623730950488); };
    const double a = (0.0 - mu[i]) / sigma[i], b = (1.0 - mu[i]) / sigma[i];
    const double Z = Phi(b) - Phi(a);
    const double trunc_mean = mu[i] + sigma[i] * (phi(a) - phi(b)) / Z;
    return 0.01 + 0.99 * trunc_mean;
  }
};

// Nested data sets (the follower's rows are the leader's first k_f rows).
inline std::pair<SampleSet, SampleSet> draw_datasets(const TruncNormalSampler& sampler, int k_l,
                                                     int k_f, Rng& rng) {
  if (k_f < 1) throw std::invalid_argument("follower needs at least one sample");
  if (k_f > k_l) throw std::invalid_argument("nested mode requires k_f <= k_l");
  SampleSet leader, follower;
  leader.owner = DataOwner::Leader;
  follower.owner = DataOwner::Follower;
  leader.samples = sampler.draw_many(k_l, rng);
  follower.samples = leader.samples.topRows(k_f);
  return {leader, follower};
}

// Independent draw for the hypothetical true-basic experiments.
inline SampleSet draw_independent(const TruncNormalSampler& sampler, int k, Rng& rng,
                                  DataOwner owner) {
  SampleSet s;
  s.owner = owner;
  s.samples = sampler.draw_many(k, rng);
  return s;
}

}  // namespace dri
