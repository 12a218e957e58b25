#include <dri/pessimistic.hpp>
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dri/evaluation.hpp>
#include <dri/instance_gen.hpp>
#include <dri/rng.hpp>
#include <dri/scenario.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dri;
using fixtures::Example1;

namespace {
Vector vec4(double a, double b, double c, double d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}
}  // namespace

TEST_CASE("cvar point values") {
  std::vector<double> z{1, 2, 3, 4};
  CHECK(cvar_right(z, 0.0) == doctest::Approx(2.5));
  CHECK(cvar_right(z, 0.75) == doctest::Approx(4.0));
  CHECK(cvar_right(z, 0.5) == doctest::Approx(3.5));
  CHECK(cvar_left(z, 0.0) == doctest::Approx(2.5));
  CHECK(cvar_left(z, 0.75) == doctest::Approx(1.0));
  CHECK_THROWS(cvar_right({}, 0.5));
}

TEST_CASE("cvar properties against the breakpoint oracle") {
  Rng rng(123);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng.uniform() * 12);
    std::vector<double> z(n);
    for (auto& v : z) v = rng.uniform(-5.0, 5.0);
    const double alpha = rng.uniform(0.0, 0.95);
    const double c = cvar_right(z, alpha);
    // breakpoint-scan oracle
    CHECK(c == doctest::Approx(oracles::cvar_right_breakpoints(z, alpha)).epsilon(1e-12));
    // translation equivariance and positive homogeneity
    std::vector<double> shifted(z), scaled(z);
    for (auto& v : shifted) v += 1.75;
    for (auto& v : scaled) v *= 2.5;
    CHECK(cvar_right(shifted, alpha) == doctest::Approx(c + 1.75).epsilon(1e-10));
    CHECK(cvar_right(scaled, alpha) == doctest::Approx(2.5 * c).epsilon(1e-10));
    // monotone in alpha
    const double c2 = cvar_right(z, std::min(0.99, alpha + 0.2));
    CHECK(c2 >= c - 1e-12);
    // mirror identity
    std::vector<double> neg(z);
    for (auto& v : neg) v = -v;
    CHECK(cvar_left(z, alpha) == doctest::Approx(-cvar_right(neg, alpha)).epsilon(1e-12));
    // integer tail = plain mean of extreme order statistics
    if (n >= 4) {
      std::vector<double> s(z);
      std::sort(s.begin(), s.end(), std::greater<>());
      const double a4 = 1.0 - 2.0 / n;  // top-2 tail
      CHECK(cvar_right(z, a4) == doctest::Approx((s[0] + s[1]) / 2.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("true best response and optimistic tie-break on the example") {
  Example1 ex;
  SampleSet eval = ex.single(ex.true_mean);
  Vector x = vec4(0, 0, 1, 1);
  auto r = follower_true_best_response(ex.inst, x, eval, 0.0);
  CHECK(r.value == doctest::Approx(6.0).epsilon(1e-7));
  // N = 1: deterministic best response to that sample
  auto r2 = follower_true_best_response(ex.inst, vec4(0, 0, 0, 0), eval, 0.0);
  CHECK(r2.value == doctest::Approx(10.0).epsilon(1e-7));
  // tie-break: costs tie for the follower, leader prefers its cheaper item
  SampleSet tie;
  tie.samples = Matrix(1, 4);
  tie.samples << 8, 8, 1, 1;  // follower indifferent between items 1 and 2
  auto ro = optimistic_true_response(ex.inst, vec4(0, 0, 0, 0), tie, 0.0, 0.0);
  CHECK(ro.value == doctest::Approx(8.0).epsilon(1e-7));
  // leader CVaR under the same samples is identical for both, so check a
  // leader-distinguishing evaluation instead: leader eval favors item 2
  MilpModel dummy;  // (construction exercised above; the distinguishing case:)
  SampleSet tie2;
  tie2.samples = Matrix(2, 4);
  tie2.samples << 8, 8, 1, 1,
      8, 8, 1, 1;
  auto ro2 = optimistic_true_response(ex.inst, vec4(0, 0, 0, 0), tie2, 0.0, 0.0);
  CHECK(ro2.value == doctest::Approx(8.0).epsilon(1e-7));
}

TEST_CASE("full-information leader on the example") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  SampleSet eval = ex.single(ex.true_mean);
  auto r = full_information_leader(ex.inst, ex.sup, ex.data_f, cfg, eval);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.value == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(r.x[0] == doctest::Approx(0.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
  CHECK(r.x[2] == doctest::Approx(1.0));
  CHECK(r.x[3] == doctest::Approx(1.0));
  // pinned leader decision reproduces the "true objective" column
  Vector xp = vec4(1, 1, 0, 0);
  auto rp = full_information_leader(ex.inst, ex.sup, ex.data_f, cfg, eval, &xp);
  REQUIRE(rp.status == SolveStatus::Optimal);
  CHECK(rp.value == doctest::Approx(10.0).epsilon(1e-6));
  Vector xt = vec4(0, 0, 0, 1);
  auto rt = full_information_leader(ex.inst, ex.sup, ex.data_f, cfg, eval, &xt);
  CHECK(rt.value == doctest::Approx(9.0).epsilon(1e-6));
  // follower data = eval samples reduces to the full-information model
  auto rsi = full_information_leader(ex.inst, ex.sup, eval, cfg, eval);
  CHECK(rsi.value == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("relative losses on the example") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  SampleSet eval = ex.single(ex.true_mean);

  SUBCASE("follower ratio") {
    Vector x = vec4(0, 0, 1, 1);
    auto best = follower_true_best_response(ex.inst, x, eval, 0.0);
    CHECK(rl_f_out(ex.inst, x, best.y, eval, 0.0) == doctest::Approx(1.0).epsilon(1e-7));
    bool flagged = false;
    CHECK(rl_f_out(ex.inst, x, Vector::Zero(4), eval, 0.0, &flagged) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(!flagged);
  }
  SUBCASE("leader ratio, fixed-x mode, against the example columns") {
    const double den = 6.0;
    CHECK(rl_l_out(ex.inst, ex.sup, vec4(1, 1, 0, 0), {}, ex.data_f, cfg, eval,
                   RlLeaderMode::FixedX) == doctest::Approx(10.0 / den).epsilon(1e-6));
    CHECK(rl_l_out(ex.inst, ex.sup, vec4(0, 0, 0, 1), {}, ex.data_f, cfg, eval,
                   RlLeaderMode::FixedX) == doctest::Approx(9.0 / den).epsilon(1e-6));
  }
  SUBCASE("self-consistency at the full-information solution") {
    auto ref = full_information_leader(ex.inst, ex.sup, ex.data_f, cfg, eval);
    CHECK(rl_l_out(ex.inst, ex.sup, ref.x, ref.y, ex.data_f, cfg, eval, RlLeaderMode::Joint) ==
          doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("in-sample ratio") {
    CHECK(rl_l_in(7.0, 7.0) == doctest::Approx(1.0));
    CHECK(rl_l_in(8.0, 7.0) == doctest::Approx(8.0 / 7.0));
  }
}

TEST_CASE("data box construction") {
  Vector lo = Vector::Constant(1, 0.01), hi = Vector::Ones(1);
  Matrix truth(2, 1);
  truth << 0.5, 0.05;
  Matrix kappa(2, 1), shift(2, 1);
  kappa << 0.2, 0.2;
  shift << 0.25, 0.9;
  auto box = build_data_box(truth, 0, kappa, shift, lo, hi);
  CHECK(box.lo(0, 0) == doctest::Approx(0.45));
  CHECK(box.hi(0, 0) == doctest::Approx(0.65));
  CHECK(box.lo(1, 0) == doctest::Approx(0.01));  // clipped
  CHECK(box.hi(1, 0) == doctest::Approx(0.07));
  // zero noise collapses to singletons
  Matrix zeros = Matrix::Zero(2, 1);
  auto degenerate = build_data_box(truth, 0, zeros, shift, lo, hi);
  CHECK(degenerate.lo == degenerate.hi);
  // known rows stay singletons regardless of noise
  auto known = build_data_box(truth, 1, kappa, shift, lo, hi);
  CHECK(known.lo(0, 0) == known.hi(0, 0));
  // round-trip through JSON
  auto j = box_to_json(box);
  auto back = box_from_json(j);
  CHECK(back.lo == box.lo);
  CHECK(back.hi == box.hi);
  CHECK(back.k_lf == box.k_lf);
}

TEST_CASE("scenario sampling") {
  Matrix truth(3, 2);
  truth << 0.5, 0.5, 0.2, 0.8, 0.7, 0.3;
  Vector lo = Vector::Zero(2), hi = Vector::Ones(2);
  Matrix kappa = Matrix::Constant(3, 2, 1.0), shift = Matrix::Constant(3, 2, 0.5);
  auto box = build_data_box(truth, 1, kappa, shift, lo, hi);
  ScenarioStreamKey key{42, 3, 7};
  auto sc1 = sample_scenarios(box, 4, key);
  auto sc2 = sample_scenarios(box, 4, key);
  REQUIRE(sc1.size() == 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(sc1[r].samples == sc2[r].samples);  // determinism
    // known row copied verbatim; all entries inside the box
    CHECK(sc1[r].samples.row(0) == truth.row(0));
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 2; ++i) {
        CHECK(sc1[r].samples(k, i) >= box.lo(k, i) - 1e-12);
        CHECK(sc1[r].samples(k, i) <= box.hi(k, i) + 1e-12);
      }
  }
  // uniform mean over many scenarios approaches the interval midpoint
  auto many = sample_scenarios(box, 3000, key);
  double mean = 0.0;
  for (const auto& s : many) mean += s.samples(1, 0);
  mean /= 3000.0;
  const double mid = 0.5 * (box.lo(1, 0) + box.hi(1, 0));
  const double half_width = box.hi(1, 0) - box.lo(1, 0);
  const double sigma = half_width / std::sqrt(12.0) / std::sqrt(3000.0);
  CHECK(std::abs(mean - mid) <= 3.0 * sigma + 1e-12);
  // singleton box: all scenarios identical to the truth
  Matrix z = Matrix::Zero(3, 2);
  auto degenerate = build_data_box(truth, 0, z, shift, lo, hi);
  auto same = sample_scenarios(degenerate, 2, key);
  CHECK(same[0].samples == truth);
  CHECK(same[1].samples == truth);
}

TEST_CASE("instance generation and the data distribution") {
  Rng rng(1234);
  auto inst = gen_packing_instance(10, 1, 10, rng);
  CHECK(inst.n == 10);
  CHECK(inst.packing_form.has_value());
  for (int j = 0; j < inst.d_l(); ++j) {
    CHECK(inst.h[j] >= 0.4 * 0.01 * 10 - 1e-12);
    CHECK(inst.h[j] <= 0.4 * 10 + 1e-12);
  }
  auto sup = unit_support(10);
  auto rep = validate_instance(inst, sup);
  CHECK(rep.ok());
  // determinism: same seed, same bytes
  Rng rng2(1234);
  auto inst2 = gen_packing_instance(10, 1, 10, rng2);
  CHECK(instance_to_json(inst, sup).dump() == instance_to_json(inst2, sup).dump());

  auto sampler = TruncNormalSampler::make(10, VarianceMode::Proportional);
  CHECK(sampler.mu[4] == doctest::Approx(0.5 * 5 / 11.0));
  CHECK(sampler.sigma[4] == doctest::Approx(0.05 + 0.4 * 5 / 11.0));
  auto inv = TruncNormalSampler::make(10, VarianceMode::Inverse);
  CHECK(inv.sigma[4] == doctest::Approx(0.05 + 0.4 - 0.4 * 5 / 11.0));

  const int N = 20000;
  Matrix draws = sampler.draw_many(N, rng);
  CHECK(draws.minCoeff() >= 0.01);
  CHECK(draws.maxCoeff() <= 1.0);
  // empirical mean of coordinate 5 within a 3-sigma Monte-Carlo band of the
  // analytic truncated-normal mean
  const double mean = draws.col(4).mean();
  const double expect = sampler.mapped_mean(4);
  double sd = 0.0;
  for (int k = 0; k < N; ++k) sd += (draws(k, 4) - mean) * (draws(k, 4) - mean);
  sd = std::sqrt(sd / (N - 1));
  CHECK(std::abs(mean - expect) <= 3.0 * sd / std::sqrt(static_cast<double>(N)));

  auto [dl, df] = draw_datasets(sampler, 8, 3, rng);
  CHECK(dl.count() == 8);
  CHECK(df.count() == 3);
  CHECK(df.samples == dl.samples.topRows(3));
  CHECK_THROWS(draw_datasets(sampler, 5, 0, rng));
  CHECK_THROWS(draw_datasets(sampler, 3, 5, rng));
  auto [dl2, df2] = draw_datasets(sampler, 4, 4, rng);
  CHECK(dl2.samples == df2.samples);
}

TEST_CASE("unimodular follower variant") {
  Rng rng(9);
  auto inst = gen_packing_instance(10, 1, 10, rng);
  auto uni = with_unimodular_follower(inst);
  CHECK(uni.packing_form->ftilde[0] == doctest::Approx(2.0));  // floor(0.2 * 10)
  std::string why;
  CHECK(check_a6_prime(uni, false, &why));
  // feasible integer responses have at most 2 ones
  int count = 0;
  for (int mask = 0; mask < (1 << 10); ++mask) {
    Vector y(10);
    for (int i = 0; i < 10; ++i) y[i] = (mask >> i) & 1 ? 1.0 : 0.0;
    if (y_in_ybar(uni, y)) {
      ++count;
      CHECK(y.sum() <= 2.0);
    }
  }
  CHECK(count == 1 + 10 + 45);
}
