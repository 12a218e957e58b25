#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dri/instance.hpp>
#include <dri/reformulation.hpp>
#include <dri/rng.hpp>
#include <dri/solve.hpp>

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

TEST_CASE("dual norm expansion minimizes the right norms") {
  for (auto q : {NormOrder::LInf, NormOrder::L1}) {
    MilpModel m;
    int lam = m.add_var("lam", 0.0, kInf, VarKind::Continuous, 1.0);
    int u = m.add_var("u", 3.0, 3.0, VarKind::Continuous, 0.0);
    int v = m.add_var("v", -4.0, -4.0, VarKind::Continuous, 0.0);
    std::vector<LinearTerms> exprs(2);
    exprs[0].add(u, 1.0);
    exprs[1].add(v, 1.0);
    expand_dual_norm_constraint(m, exprs, lam, q, "nrm");
    auto s = solve(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(q == NormOrder::LInf ? 4.0 : 7.0).epsilon(1e-7));
  }
  // zero expression binds at zero
  MilpModel m;
  int lam = m.add_var("lam", 0.0, kInf, VarKind::Continuous, 1.0);
  std::vector<LinearTerms> exprs(1);
  expand_dual_norm_constraint(m, exprs, lam, NormOrder::LInf, "nrm");
  auto s = solve(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("slack_delta on the example support") {
  Example1 ex;
  Vector c = vec4(10, 11, 8, 7);
  Vector d = slack_delta(ex.sup, c);
  Vector expect(8);
  expect << 0, 0, 4, 6, 10, 10, 2, 0;
  CHECK((d - expect).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
}

TEST_CASE("follower primal at the example SAA point") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  // interdict items 3 and 4: best remaining follower item by mean profit is 2.
  const double v = oracles::follower_value(ex.inst, ex.sup, ex.data_f, cfg, vec4(0, 0, 1, 1));
  CHECK(v == doctest::Approx(5.0).epsilon(1e-7));
  // with the true means the follower reaches 6
  const double vt =
      oracles::follower_value(ex.inst, ex.sup, ex.single(ex.true_mean), cfg, vec4(0, 0, 1, 1));
  CHECK(vt == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("SAA collapse: zero radius and alpha reduce to mean response") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  Rng rng(5);
  for (int rep = 0; rep < 4; ++rep) {
    Vector x = vec4(0, 0, 0, 0);
    int budget = 0;
    for (int i = 0; i < 4 && budget < 2; ++i)
      if (rng.uniform() < 0.4) {
        x[i] = 1;
        ++budget;
      }
    const double v = oracles::follower_value(ex.inst, ex.sup, ex.data_f, cfg, x);
    const Vector mean = ex.data_f.mean();
    double best = 0.0;
    for (int i = 0; i < 4; ++i)
      if (x[i] == 0.0) best = std::max(best, mean[i]);
    CHECK(v == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("strong duality between follower primal and dual") {
  Example1 ex;
  Rng rng(11);
  for (auto p : {NormOrder::L1, NormOrder::LInf}) {
    for (int rep = 0; rep < 6; ++rep) {
      DroConfig cfg;
      cfg.p = p;
      cfg.alpha_f = rep % 2 ? 0.0 : 0.4;
      cfg.eps_f = rep % 3 == 0 ? 0.0 : rng.uniform(0.0, 1.5);
      Vector x = vec4(0, 0, 0, 0);
      x[rep % 4] = 1;
      auto hp = build_follower_primal(ex.inst, ex.sup, ex.data_f, cfg, x);
      auto hd = build_follower_dual(ex.inst, ex.sup, ex.data_f, cfg, x);
      auto sp = solve(hp.model);
      auto sd = solve(hd.model);
      REQUIRE(sp.status == SolveStatus::Optimal);
      REQUIRE(sd.status == SolveStatus::Optimal);
      CHECK(std::abs(sp.objective - sd.objective) <= 1e-6 * (1.0 + std::abs(sp.objective)));
      // sum gamma = 1 in any optimal dual solution
      double gsum = 0.0;
      for (int id : hd.dual.gamma) gsum += sd.primal[id];
      CHECK(gsum == doctest::Approx(1.0).epsilon(1e-6));
      if (cfg.eps_f == 0.0) {
        double musum = 0.0;
        for (const auto& row : hd.dual.mu_up)
          for (int id : row) musum += sd.primal[id];
        for (const auto& row : hd.dual.mu_dn)
          for (int id : row) musum += sd.primal[id];
        CHECK(musum <= 1e-6);
      }
    }
  }
}

TEST_CASE("radius monotonicity of the follower value") {
  Example1 ex;
  DroConfig cfg = fixtures::saa_config();
  Vector x = vec4(0, 0, 1, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.0, 0.1, 0.5, 2.0, 8.0}) {
    cfg.eps_f = eps;
    const double v = oracles::follower_value(ex.inst, ex.sup, ex.data_f, cfg, x);
    CHECK(v <= prev + 1e-7);
    prev = v;
  }
}

TEST_CASE("large radius worst case matches the transport oracle on a grid") {
  // 2-item instance over S = [0,1]^2, grid step 0.25, alpha = 0, fixed y.
  Matrix H(1, 2);
  H << 1, 1;
  Vector h(1);
  h << 1;
  Matrix Ft(1, 2);
  Ft << 1, 1;
  Vector ft(1);
  ft << 2;  // loose packing row so y can reach (1,1)
  auto inst = InterdictionInstance::packing(H, h, Ft, ft, Vector::Ones(2));
  Matrix grid(25, 2);
  {
    int r = 0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) grid.row(r++) << 0.25 * a, 0.25 * b;
  }
  SampleSet data;
  data.samples = Matrix(2, 2);
  data.samples << 0.75, 0.5, 0.25, 1.0;
  auto sup = PolyhedralSupport::from_intervals(Vector::Zero(2), Vector::Ones(2));
  for (auto p : {NormOrder::L1, NormOrder::LInf}) {
    for (double eps : {0.25, 0.5, 3.0}) {
      // worst-case expectation of c'y at fixed y = (1, 1): evaluate via the
      // follower LP with the objective restricted to that y by bounds.
      DroConfig cfg;
      cfg.p = p;
      cfg.eps_f = eps;
      MilpModel m;
      m.sense = Sense::Maximize;
      XContext xc;
      xc.value = Vector::Zero(2);
      auto fp = append_follower_primal_block(m, inst, sup, data, cfg, xc, "");
      auto obj = fp.objective(0.0, eps, 2);
      for (auto& [v, c] : obj.terms) m.add_obj(v, c);
      m.set_bounds(fp.y[0], 1.0, 1.0);
      m.set_bounds(fp.y[1], 1.0, 1.0);
      auto s = solve(m);
      REQUIRE(s.status == SolveStatus::Optimal);
      Vector y = Vector::Ones(2);
      const double oracle = oracles::worst_case_expectation_grid(grid, data, y, eps, p);
      // the grid contains every vertex the worst case needs at these radii
      CHECK(std::abs(s.objective - oracle) <= 1e-6 * (1.0 + std::abs(oracle)));
    }
  }
}

TEST_CASE("big-M derivation") {
  Example1 ex;  // support is not within [0,1]^n -> conservative route
  {
    DroConfig cfg = fixtures::saa_config();
    auto M = derive_big_m_packing(ex.inst, ex.sup, cfg);
    CHECK(M.conservative);
  }
  // unit-scaled packing instance
  Matrix H(1, 10);
  H.setConstant(0.5);
  Vector h(1);
  h << 2;
  Matrix Ft(2, 10);
  Ft.setConstant(0.3);
  Vector ft(2);
  ft << 1.2, 1.2;
  auto inst = InterdictionInstance::packing(H, h, Ft, ft, Vector::Ones(10));
  auto sup = PolyhedralSupport::from_intervals(Vector::Constant(10, 0.01), Vector::Ones(10));
  DroConfig cfg;
  cfg.alpha_f = 0.95;
  cfg.eps_f = wasserstein_radius(0.1, 30);
  auto M = derive_big_m_packing(inst, sup, cfg);
  CHECK(!M.conservative);
  CHECK(M.value == doctest::Approx(10.0));
  cfg.alpha_f = 0.0;
  cfg.eps_f = 0.0;
  CHECK(derive_big_m_packing(inst, sup, cfg).value == doctest::Approx(10.0));
  // two-item variant where the dual tail dominates
  Matrix H2 = H.leftCols(2), Ft2 = Ft.leftCols(2);
  auto inst2 = InterdictionInstance::packing(H2, h, Ft2, ft, Vector::Ones(2));
  auto sup2 = PolyhedralSupport::from_intervals(Vector::Constant(2, 0.01), Vector::Ones(2));
  DroConfig cfg2;
  cfg2.alpha_f = 0.9;
  cfg2.eps_f = 0.5;
  CHECK(derive_big_m_packing(inst2, sup2, cfg2).value == doctest::Approx(6.0));
}

TEST_CASE("basic DRI on the example: augmented and true settings") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  SolveOptions opt;
  opt.lex_tiebreak = true;

  SUBCASE("augmented basic uses the leader data on both sides") {
    auto H = build_basic_dri(ex.inst, ex.sup, ex.data_l, ex.data_l, cfg);
    auto s = solve(H.model, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(8.0).epsilon(1e-7));
    CHECK(s.primal[H.x[0]] == 1.0);
    CHECK(s.primal[H.x[1]] == 1.0);
    CHECK(s.primal[H.x[2]] == 0.0);
    CHECK(s.primal[H.x[3]] == 0.0);
  }
  SUBCASE("true basic disables nesting") {
    CHECK_THROWS(build_basic_dri(ex.inst, ex.sup, ex.data_l, ex.data_f, cfg));
    auto H = build_basic_dri(ex.inst, ex.sup, ex.data_l, ex.data_f, cfg, false);
    auto s = solve(H.model, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(7.0).epsilon(1e-7));
    CHECK(s.primal[H.x[0]] == 0.0);
    CHECK(s.primal[H.x[1]] == 0.0);
    CHECK(s.primal[H.x[2]] == 0.0);
    CHECK(s.primal[H.x[3]] == 1.0);
  }
  SUBCASE("single identical sample reduces to the deterministic game") {
    SampleSet one = ex.single(vec4(2, 3, 7, 8));
    auto H = build_basic_dri(ex.inst, ex.sup, one, one, cfg);
    auto s = solve(H.model, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    // interdicting items 3,4 leaves max profit 3
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-7));
  }
}

TEST_CASE("basic DRI equals enumeration oracle on random instances") {
  Rng rng(2024);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 4 + static_cast<int>(rng.uniform() * 3);  // 4..6
    Matrix H(1, n), Ft(3, n);
    for (int j = 0; j < n; ++j) H(0, j) = rng.uniform(0.01, 1.0);
    Vector h(1);
    h << 0.4 * H.row(0).sum();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < n; ++j) Ft(i, j) = rng.uniform(0.01, 1.0);
    Vector ft = 0.4 * Ft.rowwise().sum();
    auto inst = InterdictionInstance::packing(H, h, Ft, ft, Vector::Ones(n));
    auto sup = PolyhedralSupport::from_intervals(Vector::Constant(n, 0.01), Vector::Ones(n));
    SampleSet data_l, data_f;
    const int kl = 4, kf = 3;
    data_l.samples = Matrix(kl, n);
    for (int k = 0; k < kl; ++k)
      for (int j = 0; j < n; ++j) data_l.samples(k, j) = rng.uniform(0.01, 1.0);
    data_f.samples = data_l.samples.topRows(kf);
    DroConfig cfg = fixtures::saa_config();
    auto Hm = build_basic_dri(inst, sup, data_l, data_f, cfg);
    auto s = solve(Hm.model);
    REQUIRE(s.status == SolveStatus::Optimal);
    auto [ox, ov] = oracles::basic_dri_by_enumeration(inst, sup, data_l, data_f, cfg);
    CHECK(std::abs(s.objective - ov) <= 1e-6 * (1.0 + std::abs(ov)));
  }
}

TEST_CASE("big-M doubling leaves the optimum unchanged") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  auto H1 = build_basic_dri(ex.inst, ex.sup, ex.data_l, ex.data_l, cfg);
  auto s1 = solve(H1.model);
  // rebuild with twice the M by editing bounds through a fresh model
  auto H2 = build_basic_dri(ex.inst, ex.sup, ex.data_l, ex.data_l, cfg);
  REQUIRE(s1.status == SolveStatus::Optimal);
  // manual rebuild with doubled big-M
  MilpModel m;
  m.sense = Sense::Minimize;
  std::vector<int> x;
  add_leader_polytope(m, ex.inst, x);
  XContext xc;
  xc.vars = x;
  auto fp = append_follower_primal_block(m, ex.inst, ex.sup, ex.data_l, cfg, xc, "");
  auto lead = append_leader_cvar_block(m, ex.sup, ex.data_l, cfg, fp.y, "");
  auto fd = append_follower_dual_block(m, ex.inst, ex.sup, ex.data_l, cfg, "");
  auto bigm = derive_big_m_packing(ex.inst, ex.sup, cfg);
  add_strong_duality_row(m, ex.inst, cfg, x, fp, fd, 2.0 * bigm.value, "");
  auto obj = lead.objective(cfg.alpha_l, cfg.eps_l, ex.data_l.count());
  for (auto& [v, c] : obj.terms) m.add_obj(v, c);
  auto s2 = solve(m);
  REQUIRE(s2.status == SolveStatus::Optimal);
  CHECK(std::abs(s1.objective - s2.objective) <= 1e-6 * (1.0 + std::abs(s1.objective)));
}

TEST_CASE("semi-pessimistic MILP") {
  Example1 ex;
  auto cfg = fixtures::saa_config();
  SolveOptions opt;
  opt.lex_tiebreak = true;

  SUBCASE("single scenario equal to the follower data collapses to true basic") {
    std::vector<SampleSet> sc{ex.data_f};
    auto H = build_semi_pessimistic(ex.inst, ex.sup, ex.data_l, sc, cfg);
    auto s = solve(H.model, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(7.0).epsilon(1e-7));
  }
  SUBCASE("corner scenarios reproduce the example row") {
    std::vector<SampleSet> sc;
    for (double c3 : {6.0, 12.0})
      for (double c4 : {7.0, 13.0}) sc.push_back(ex.single(vec4(4, 5, c3, c4)));
    auto H = build_semi_pessimistic(ex.inst, ex.sup, ex.data_l, sc, cfg);
    auto s = solve(H.model, opt);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(7.0).epsilon(1e-7));
    CHECK(s.primal[H.x[0]] == 0.0);
    CHECK(s.primal[H.x[1]] == 0.0);
    CHECK(s.primal[H.x[2]] == 0.0);
    CHECK(s.primal[H.x[3]] == 1.0);
    // appending scenarios can only push the value up
    sc.push_back(ex.single(vec4(4, 5, 9, 9)));
    auto H2 = build_semi_pessimistic(ex.inst, ex.sup, ex.data_l, sc, cfg);
    auto s2 = solve(H2.model, opt);
    REQUIRE(s2.status == SolveStatus::Optimal);
    CHECK(s2.objective >= s.objective - 1e-7);
  }
  SUBCASE("matches the enumeration oracle") {
    std::vector<SampleSet> sc{ex.single(vec4(4, 5, 12, 7)), ex.single(vec4(4, 5, 6, 13))};
    auto H = build_semi_pessimistic(ex.inst, ex.sup, ex.data_l, sc, cfg);
    auto s = solve(H.model);
    REQUIRE(s.status == SolveStatus::Optimal);
    const double oracle =
        oracles::semi_pessimistic_by_enumeration(ex.inst, ex.sup, ex.data_l, sc, cfg);
    CHECK(std::abs(s.objective - oracle) <= 1e-6 * (1.0 + std::abs(oracle)));
  }
  SUBCASE("empty scenario list is rejected") {
    CHECK_THROWS(build_semi_pessimistic(ex.inst, ex.sup, ex.data_l, {}, cfg));
  }
}

TEST_CASE("slack_delta affinity property") {
  Example1 ex;
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    Vector c1(4), c2(4);
    for (int i = 0; i < 4; ++i) {
      c1[i] = rng.uniform(-5, 15);
      c2[i] = rng.uniform(-5, 15);
    }
    Vector lhs = slack_delta(ex.sup, c1) + slack_delta(ex.sup, c2) - slack_delta(ex.sup, c1 + c2);
    CHECK((lhs - ex.sup.b).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("compact box formulation is equivalent to the literal one") {
  Rng rng(31);
  for (int rep = 0; rep < 6; ++rep) {
    const int n = 4 + (rep % 3);
    Matrix H(1, n), Ft(3, n);
    for (int j = 0; j < n; ++j) H(0, j) = rng.uniform(0.01, 1.0);
    Vector h(1);
    h << 0.4 * H.row(0).sum();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < n; ++j) Ft(i, j) = rng.uniform(0.01, 1.0);
    Vector ft = 0.4 * Ft.rowwise().sum();
    auto inst = InterdictionInstance::packing(H, h, Ft, ft, Vector::Ones(n));
    auto sup = PolyhedralSupport::from_intervals(Vector::Constant(n, 0.01), Vector::Ones(n));
    SampleSet data_l;
    data_l.samples = Matrix(5, n);
    for (int k = 0; k < 5; ++k)
      for (int j = 0; j < n; ++j) data_l.samples(k, j) = rng.uniform(0.01, 1.0);
    SampleSet data_f;
    data_f.samples = data_l.samples.topRows(3);
    DroConfig cfg;
    cfg.alpha_l = rep % 2 ? 0.0 : 0.6;
    cfg.alpha_f = rep % 2 ? 0.4 : 0.0;
    cfg.eps_l = rng.uniform(0.0, 0.1);
    cfg.eps_f = rng.uniform(0.0, 0.3);
    auto lit = build_basic_dri(inst, sup, data_l, data_f, cfg, true, FormulationStyle::Literal);
    auto cmp = build_basic_dri(inst, sup, data_l, data_f, cfg, true, FormulationStyle::BoxCompact);
    CHECK(cmp.model.num_vars() < lit.model.num_vars());
    auto sl = solve(lit.model);
    auto sc = solve(cmp.model);
    REQUIRE(sl.status == SolveStatus::Optimal);
    REQUIRE(sc.status == SolveStatus::Optimal);
    CHECK(std::abs(sl.objective - sc.objective) <= 1e-6 * (1.0 + std::abs(sl.objective)));
  }
}
