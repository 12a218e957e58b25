#pragma once

// Leader-side interval uncertainty over the follower's data set and the
// uniform scenario sampling for the discretized semi-pessimistic model.

#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "dri/instance.hpp"
#include "dri/rng.hpp"

namespace dri {

// Per-sample, per-coordinate intervals; the first k_lf rows are singletons
// (samples the leader knows exactly).
struct FollowerDataBox {
  int k_f = 0, k_lf = 0;
  Matrix lo, hi;  // k_f x n

  void check() const {
    if (lo.rows() != k_f || hi.rows() != k_f || lo.cols() != hi.cols())
      throw std::invalid_argument("data box dimensions inconsistent");
    if (k_lf > k_f || k_lf < 0) throw std::invalid_argument("k_lf must lie in [0, k_f]");
    for (int k = 0; k < k_f; ++k)
      for (int i = 0; i < lo.cols(); ++i) {
        if (lo(k, i) > hi(k, i)) throw std::invalid_argument("data box has lo > hi");
        if (k < k_lf && lo(k, i) != hi(k, i))
          throw std::invalid_argument("known rows must be singletons");
      }
  }
};

// Intervals [c* - kappa*shift, c* + kappa*(1 - shift)] clipped to the
// coordinate bounds; kappa and shift are per-entry (rows below k_lf ignored).
inline FollowerDataBox build_data_box(const Matrix& true_follower_data, int k_lf,
                                      const Matrix& kappa, const Matrix& shift,
                                      const Vector& coord_lo, const Vector& coord_hi) {
  const int kf = static_cast<int>(true_follower_data.rows());
  const int n = static_cast<int>(true_follower_data.cols());
  if (k_lf > kf) throw std::invalid_argument("k_lf exceeds the follower sample count");
  FollowerDataBox box;
  box.k_f = kf;
  box.k_lf = k_lf;
  box.lo = true_follower_data;
  box.hi = true_follower_data;
  for (int k = k_lf; k < kf; ++k)
    for (int i = 0; i < n; ++i) {
      const double c = true_follower_data(k, i);
      const double kap = kappa(k, i);
      const double del = shift(k, i);
      box.lo(k, i) = std::max(c - kap * del, coord_lo[i]);
      box.hi(k, i) = std::min(c + kap * (1.0 - del), coord_hi[i]);
    }
  box.check();
  return box;
}

// The experiments' recipe: roughly half the unknown entries get noise level
// kappa_tilde (per-entry Bernoulli), shifts uniform on [0, 1].
inline FollowerDataBox build_data_box_random(const Matrix& true_follower_data, int k_lf,
                                             double kappa_tilde, const Vector& coord_lo,
                                             const Vector& coord_hi, Rng& rng) {
  const int kf = static_cast<int>(true_follower_data.rows());
  const int n = static_cast<int>(true_follower_data.cols());
  Matrix kappa = Matrix::Zero(kf, n), shift = Matrix::Zero(kf, n);
  for (int k = k_lf; k < kf; ++k)
    for (int i = 0; i < n; ++i) {
      kappa(k, i) = rng.uniform() < 0.5 ? 0.0 : kappa_tilde;
      shift(k, i) = rng.uniform();
    }
  return build_data_box(true_follower_data, k_lf, kappa, shift, coord_lo, coord_hi);
}

struct ScenarioStreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t instance_id = 0;
  std::uint64_t replicate_id = 0;
};

// r_l data sets drawn uniformly from the box, one keyed substream per
// scenario so parallel runs reproduce byte-identically.
inline std::vector<SampleSet> sample_scenarios(const FollowerDataBox& box, int r_l,
                                               const ScenarioStreamKey& key) {
  if (r_l < 1) throw std::invalid_argument("need at least one scenario");
  box.check();
  std::vector<SampleSet> out;
  out.reserve(r_l);
  const int n = static_cast<int>(box.lo.cols());
  for (int r = 0; r < r_l; ++r) {
    Rng rng(derive_seed(key.master_seed,
                        {kScenarioStream, key.instance_id, key.replicate_id,
                         static_cast<std::uint64_t>(r)}));
    SampleSet sc;
    sc.owner = DataOwner::Follower;
    sc.samples = Matrix(box.k_f, n);
    for (int k = 0; k < box.k_f; ++k)
      for (int i = 0; i < n; ++i)
        sc.samples(k, i) = box.lo(k, i) == box.hi(k, i)
                               ? box.lo(k, i)
                               : rng.uniform(box.lo(k, i), box.hi(k, i));
    out.push_back(std::move(sc));
  }
  return out;
}

inline nlohmann::json box_to_json(const FollowerDataBox& box) {
  nlohmann::json j;
  j["k_f"] = box.k_f;
  j["k_lf"] = box.k_lf;
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < box.k_f; ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < box.lo.cols(); ++i)
      row.push_back(nlohmann::json::array({box.lo(k, i), box.hi(k, i)}));
    rows.push_back(std::move(row));
  }
  j["intervals"] = std::move(rows);
  return j;
}

inline FollowerDataBox box_from_json(const nlohmann::json& j) {
  FollowerDataBox box;
  box.k_f = j.at("k_f").get<int>();
  box.k_lf = j.at("k_lf").get<int>();
  const auto& rows = j.at("intervals");
  const int n = rows.empty() ? 0 : static_cast<int>(rows.at(0).size());
  box.lo = Matrix(box.k_f, n);
  box.hi = Matrix(box.k_f, n);
  for (int k = 0; k < box.k_f; ++k)
    for (int i = 0; i < n; ++i) {
      box.lo(k, i) = rows.at(k).at(i).at(0).get<double>();
      box.hi(k, i) = rows.at(k).at(i).at(1).get<double>();
    }
  box.check();
  return box;
}

}  // namespace dri
