#pragma once

// Batch experiment machinery: model dispatch shared by the CLI and the
// acceptance suite, spec-file driven sweeps with seeded streams, worker-pool
// execution with deterministic output order, and figure aggregation.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dri/evaluation.hpp"
#include "dri/instance.hpp"
#include "dri/instance_gen.hpp"
#include "dri/io.hpp"
#include "dri/pessimistic.hpp"
#include "dri/reformulation.hpp"
#include "dri/scenario.hpp"
#include "dri/solve.hpp"

namespace dri {

// ---- run configuration -------------------------------------------------------

// Mirrors the CLI config file {alpha_l, alpha_f, delta_l, delta_f, p, r_l,
// k_lf, kappa}; radii are derived from the data sizes.
struct RunConfig {
  double alpha_l = 0.0, alpha_f = 0.0;
  double delta_l = 0.0, delta_f = 0.0;
  NormOrder p = NormOrder::L1;
  int r_l = 1;
  int k_lf = 0;
  double kappa = 0.0;

  DroConfig dro(int k_l, int k_f) const {
    DroConfig cfg;
    cfg.alpha_l = alpha_l;
    cfg.alpha_f = alpha_f;
    cfg.eps_l = wasserstein_radius(delta_l, k_l);
    cfg.eps_f = wasserstein_radius(delta_f, k_f);
    cfg.p = p;
    cfg.check();
    return cfg;
  }
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("alpha_l")) c.alpha_l = j.at("alpha_l").get<double>();
  if (j.contains("alpha_f")) c.alpha_f = j.at("alpha_f").get<double>();
  if (j.contains("delta_l")) c.delta_l = j.at("delta_l").get<double>();
  if (j.contains("delta_f")) c.delta_f = j.at("delta_f").get<double>();
  if (j.contains("p")) {
    const auto& p = j.at("p");
    if (p.is_string())
      c.p = p.get<std::string>() == "inf" ? NormOrder::LInf : NormOrder::L1;
    else
      c.p = p.get<int>() == 1 ? NormOrder::L1 : NormOrder::LInf;
  }
  if (j.contains("r_l")) c.r_l = j.at("r_l").get<int>();
  if (j.contains("k_lf")) c.k_lf = j.at("k_lf").get<int>();
  if (j.contains("kappa")) c.kappa = j.at("kappa").get<double>();
  return c;
}

// ---- model dispatch ------------------------------------------------------------

struct ModelOutcome {
  SolveStatus status = SolveStatus::Error;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Vector x, y;
  bool has_y = false;
  long iterations = 0;  // B&B nodes or Benders iterations
  double wall_s = 0.0;
  std::string note;
  std::vector<BendersTraceRow> trace;
};

struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Dispatches one of the five models (plus the evaluation-side references) on
// prepared inputs. Scenario list is consumed by the semi-pessimistic model.
inline ModelOutcome solve_model(const std::string& model, const InterdictionInstance& inst,
                                const PolyhedralSupport& sup, const SampleSet& data_l,
                                const SampleSet& data_f, const std::vector<SampleSet>& scenarios,
                                const DroConfig& cfg, const SolveOptions& sopt,
                                FormulationStyle style = FormulationStyle::Auto,
                                const SampleSet* eval = nullptr,
                                MilpModel* built_model = nullptr) {
  ModelOutcome out;
  auto fill_from = [&](const Solution& s, const std::vector<int>& xids,
                       const std::vector<int>& yids) {
    out.status = s.status;
    out.wall_s = s.wall_s;
    out.iterations = s.nodes;
    if (!s.has_point()) return;
    out.objective = s.objective;
    out.x.resize(xids.size());
    for (std::size_t i = 0; i < xids.size(); ++i) out.x[i] = s.primal[xids[i]];
    if (!yids.empty()) {
      out.y.resize(yids.size());
      for (std::size_t i = 0; i < yids.size(); ++i) out.y[i] = s.primal[yids[i]];
      out.has_y = true;
    }
  };

  if (model == "basic" || model == "true-basic" || model == "augmented-basic") {
    const SampleSet& df = model == "augmented-basic" ? data_l : data_f;
    if (model == "basic" && !nesting_holds(data_l, df))
      throw PreconditionError("A3: follower data must be a prefix of the leader's");
    auto H = build_basic_dri(inst, sup, data_l, df, cfg, /*enforce_nesting=*/false, style);
    if (built_model) *built_model = H.model;
    fill_from(solve(H.model, sopt), H.x, H.fprimal.y);
  } else if (model == "semi-pessimistic") {
    if (scenarios.empty()) throw PreconditionError("semi-pessimistic model needs scenarios");
    auto H = build_semi_pessimistic(inst, sup, data_l, scenarios, cfg, style);
    if (built_model) *built_model = H.model;
    fill_from(solve(H.model, sopt), H.x, {});
    // report the first scenario's response as the representative y
    if (out.status == SolveStatus::Optimal) out.note = "per-scenario responses in the model";
  } else if (model == "pessimistic-af") {
    if (cfg.eps_l != 0.0)
      throw PreconditionError("A6: the ambiguity-free algorithm requires eps_l = 0");
    auto res = benders_ambiguity_free(inst, sup, data_l, cfg, Vector::Zero(inst.m), 1e-3, sopt);
    out.status = res.status;
    out.objective = res.objective;
    out.x = res.x;
    out.iterations = res.iterations;
    out.note = res.note;
    out.trace = res.trace;
  } else if (model == "pessimistic-rn") {
    if (cfg.alpha_l != 0.0)
      throw PreconditionError("A6': the risk-neutral algorithm requires alpha_l = 0");
    std::string why;
    if (!check_a6_prime(inst, false, &why)) throw PreconditionError("A6': " + why);
    auto res = benders_risk_neutral(inst, sup, data_l, cfg, 1e-3, false, sopt);
    out.status = res.status;
    out.objective = res.objective;
    out.x = res.x;
    out.iterations = res.iterations;
    out.note = res.note;
    out.trace = res.trace;
  } else if (model == "full-information") {
    // both sides respond to the evaluation distribution (radius 0)
    if (!eval || eval->count() == 0)
      throw PreconditionError("full-information model needs evaluation samples");
    DroConfig fcfg = cfg;
    fcfg.eps_f = 0.0;
    auto res = full_information_leader(inst, sup, *eval, fcfg, *eval, nullptr, sopt);
    out.status = res.status;
    out.objective = res.value;
    out.x = res.x;
    out.y = res.y;
    out.has_y = res.status == SolveStatus::Optimal;
  } else {
    throw std::invalid_argument("unknown model '" + model + "'");
  }
  return out;
}

// ---- experiment specs ------------------------------------------------------------

struct ExperimentSpec {
  std::string id;
  std::vector<std::string> models;
  std::string sweep_var = "none";
  std::vector<double> grid{0.0};
  int instances = 1, replicates = 1;
  int n = 10, d_l = 1, d_f = 10;
  int k_l = 30, k_f = 30;
  RunConfig base;
  int eval_samples = 1000;
  VarianceMode variance = VarianceMode::Proportional;
  bool unimodular_follower = false;
  std::string follower_data_mode = "nested";  // or "independent"
  bool lex_tiebreak = false;
  double time_limit = 3600.0;
  // which out-of-sample measures to evaluate (each costs extra solves)
  bool want_rl_f = true, want_rl_l = true, want_rl_in = true, want_true_risk = true;
  // fixture mode: explicit instance/data/scenarios instead of generation
  std::optional<nlohmann::json> fixture;
};

inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.id = j.at("id").get<std::string>();
  for (const auto& m : j.at("models")) s.models.push_back(m.get<std::string>());
  if (j.contains("sweep")) {
    s.sweep_var = j.at("sweep").at("var").get<std::string>();
    s.grid.clear();
    for (const auto& v : j.at("sweep").at("grid")) s.grid.push_back(v.get<double>());
  }
  if (j.contains("instances")) s.instances = j.at("instances").get<int>();
  if (j.contains("replicates")) s.replicates = j.at("replicates").get<int>();
  if (j.contains("n")) s.n = j.at("n").get<int>();
  if (j.contains("d_l")) s.d_l = j.at("d_l").get<int>();
  if (j.contains("d_f")) s.d_f = j.at("d_f").get<int>();
  if (j.contains("k_l")) s.k_l = j.at("k_l").get<int>();
  if (j.contains("k_f")) s.k_f = j.at("k_f").get<int>();
  if (j.contains("config")) s.base = run_config_from_json(j.at("config"));
  if (j.contains("eval_samples")) s.eval_samples = j.at("eval_samples").get<int>();
  if (j.contains("variance_mode"))
    s.variance = j.at("variance_mode").get<std::string>() == "inverse" ? VarianceMode::Inverse
                                                                       : VarianceMode::Proportional;
  if (j.contains("unimodular_follower"))
    s.unimodular_follower = j.at("unimodular_follower").get<bool>();
  if (j.contains("follower_data_mode"))
    s.follower_data_mode = j.at("follower_data_mode").get<std::string>();
  if (j.contains("lex_tiebreak")) s.lex_tiebreak = j.at("lex_tiebreak").get<bool>();
  if (j.contains("time_limit")) s.time_limit = j.at("time_limit").get<double>();
  if (j.contains("metrics")) {
    s.want_rl_f = s.want_rl_l = s.want_rl_in = s.want_true_risk = false;
    for (const auto& m : j.at("metrics")) {
      const auto name = m.get<std::string>();
      if (name == "rl_f_out") s.want_rl_f = true;
      if (name == "rl_l_out") s.want_rl_l = true;
      if (name == "rl_l_in") s.want_rl_in = true;
      if (name == "true_risk") s.want_true_risk = true;
    }
  }
  if (j.contains("fixture")) s.fixture = j.at("fixture");
  return s;
}

// ---- results ----------------------------------------------------------------------

inline const char* results_header() {
  return "spec_id,model,instance_id,replicate_id,sweep_var,sweep_value,n,k_l,k_f,k_lf,r_l,"
         "alpha_l,alpha_f,delta_l,delta_f,eps_l,eps_f,p,kappa,seed,status,objective,x,"
         "rl_f_out,rl_l_out,rl_l_in,true_cvar_left,true_mean,true_cvar_right,iterations,wall_s";
}

struct ResultRow {
  std::string spec_id, model;
  int instance_id = 0, replicate_id = 0;
  std::string sweep_var;
  double sweep_value = 0.0;
  int n = 0, k_l = 0, k_f = 0, k_lf = 0, r_l = 0;
  double alpha_l = 0, alpha_f = 0, delta_l = 0, delta_f = 0, eps_l = 0, eps_f = 0;
  NormOrder p = NormOrder::L1;
  double kappa = 0;
  std::uint64_t seed = 0;
  std::string status;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::string x;
  double rl_f = std::numeric_limits<double>::quiet_NaN();
  double rl_l = std::numeric_limits<double>::quiet_NaN();
  double rl_in = std::numeric_limits<double>::quiet_NaN();
  double cvar_left_true = std::numeric_limits<double>::quiet_NaN();
  double mean_true = std::numeric_limits<double>::quiet_NaN();
  double cvar_right_true = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  double wall_s = 0.0;

  std::string csv() const {
    auto num = [](double v) {
      return std::isnan(v) ? std::string() : render_double(v);
    };
    std::string out;
    out += spec_id + "," + model + "," + std::to_string(instance_id) + "," +
           std::to_string(replicate_id) + "," + sweep_var + "," + render_double(sweep_value) +
           "," + std::to_string(n) + "," + std::to_string(k_l) + "," + std::to_string(k_f) + "," +
           std::to_string(k_lf) + "," + std::to_string(r_l) + "," + render_double(alpha_l) + "," +
           render_double(alpha_f) + "," + render_double(delta_l) + "," + render_double(delta_f) +
           "," + render_double(eps_l) + "," + render_double(eps_f) + "," +
           (p == NormOrder::L1 ? "1" : "inf") + "," + render_double(kappa) + "," +
           std::to_string(seed) + "," + status + "," + num(objective) + "," + x + "," + num(rl_f) +
           "," + num(rl_l) + "," + num(rl_in) + "," + num(cvar_left_true) + "," + num(mean_true) +
           "," + num(cvar_right_true) + "," + std::to_string(iterations) + "," +
           render_double(wall_s);
    return out;
  }
};

inline std::string bits(const Vector& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += x[i] > 0.5 ? '1' : '0';
  return s;
}

// ---- the runner --------------------------------------------------------------------

struct CellInputs {
  InterdictionInstance inst;
  PolyhedralSupport sup;
  SampleSet data_l, data_f;
  std::vector<SampleSet> scenarios;
  SampleSet eval;
  DroConfig cfg;
  RunConfig run;
  int k_l = 0, k_f = 0;
};

// Applies the sweep variable, generates seeded inputs for one
// (instance, replicate, grid point) cell.
inline CellInputs prepare_cell(const ExperimentSpec& spec, std::uint64_t master, int instance_id,
                               int replicate_id, double sweep_value) {
  CellInputs c;
  c.run = spec.base;
  int k_l = spec.k_l, k_f = spec.k_f, n = spec.n;
  double kappa = spec.base.kappa;
  int k_lf = spec.base.k_lf, r_l = spec.base.r_l;
  const std::string& v = spec.sweep_var;
  if (v == "k_f") k_f = static_cast<int>(std::lround(sweep_value));
  else if (v == "k_l") k_l = static_cast<int>(std::lround(sweep_value));
  else if (v == "k") k_l = k_f = static_cast<int>(std::lround(sweep_value));
  else if (v == "delta_f") c.run.delta_f = sweep_value;
  else if (v == "delta_l") c.run.delta_l = sweep_value;
  else if (v == "r_l") r_l = static_cast<int>(std::lround(sweep_value));
  else if (v == "k_lf") k_lf = static_cast<int>(std::lround(sweep_value));
  else if (v == "kappa") kappa = sweep_value;
  else if (v == "n") n = static_cast<int>(std::lround(sweep_value));
  else if (v == "risk_grid") {
    // 0: NN, 1: NA, 2: AN, 3: AA with the risk-averse level 0.95
    const int g = static_cast<int>(std::lround(sweep_value));
    c.run.alpha_l = (g == 2 || g == 3) ? 0.95 : 0.0;
    c.run.alpha_f = (g == 1 || g == 3) ? 0.95 : 0.0;
  } else if (v != "none")
    throw std::invalid_argument("unknown sweep variable '" + v + "'");
  c.run.k_lf = k_lf;
  c.run.r_l = r_l;
  c.run.kappa = kappa;
  c.k_l = k_l;
  c.k_f = k_f;

  if (spec.fixture) {
    const auto& fx = *spec.fixture;
    auto [inst, sup] = instance_from_json(fx.at("instance"));
    c.inst = inst;
    c.sup = sup;
    c.data_l.samples = matrix_from_json(fx.at("leader_data"));
    c.data_f.samples = matrix_from_json(fx.at("follower_data"));
    c.data_f.owner = DataOwner::Follower;
    if (fx.contains("scenarios"))
      for (const auto& sc : fx.at("scenarios")) {
        SampleSet s;
        s.owner = DataOwner::Follower;
        s.samples = matrix_from_json(sc);
        c.scenarios.push_back(std::move(s));
      }
    if (fx.contains("eval_samples")) {
      c.eval.samples = matrix_from_json(fx.at("eval_samples"));
    }
    c.k_l = c.data_l.count();
    c.k_f = c.data_f.count();
    c.cfg = c.run.dro(c.k_l, c.k_f);
    return c;
  }

  Rng irng(derive_seed(master, {kInstanceStream, static_cast<std::uint64_t>(instance_id)}));
  c.inst = gen_packing_instance(n, spec.d_l, spec.d_f, irng);
  if (spec.unimodular_follower) c.inst = with_unimodular_follower(c.inst);
  c.sup = unit_support(n);
  auto sampler = TruncNormalSampler::make(n, spec.variance);
  Rng drng(derive_seed(master, {kDatasetStream, static_cast<std::uint64_t>(instance_id),
                                static_cast<std::uint64_t>(replicate_id)}));
  if (spec.follower_data_mode == "independent") {
    c.data_l = draw_independent(sampler, k_l, drng, DataOwner::Leader);
    c.data_f = draw_independent(sampler, k_f, drng, DataOwner::Follower);
  } else {
    auto [dl, df] = draw_datasets(sampler, std::max(k_l, k_f), k_f, drng);
    c.data_l = dl;
    c.data_l.samples = dl.samples.topRows(k_l);
    c.data_f = df;
  }
  Rng erng(derive_seed(master, {kEvalStream, static_cast<std::uint64_t>(instance_id),
                                static_cast<std::uint64_t>(replicate_id)}));
  c.eval.samples = sampler.draw_many(spec.eval_samples, erng);

  bool needs_scenarios = false;
  for (const auto& m : spec.models) needs_scenarios = needs_scenarios || m == "semi-pessimistic";
  if (needs_scenarios) {
    Rng brng(derive_seed(master, {kBoxStream, static_cast<std::uint64_t>(instance_id),
                                  static_cast<std::uint64_t>(replicate_id)}));
    const auto [lo, hi] = support_coordinate_range(c.sup);
    auto box =
        build_data_box_random(c.data_f.samples, std::min(k_lf, c.data_f.count()), kappa, lo, hi,
                              brng);
    ScenarioStreamKey key{master, static_cast<std::uint64_t>(instance_id),
                          static_cast<std::uint64_t>(replicate_id)};
    c.scenarios = sample_scenarios(box, r_l, key);
  }
  c.cfg = c.run.dro(c.k_l, std::max(1, c.k_f));
  return c;
}

// Runs every (instance, replicate, grid, model) cell; rows come back in a
// deterministic order regardless of the worker count.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, std::uint64_t master,
                                             int jobs = 1) {
  struct Cell {
    int instance_id, replicate_id;
    double sweep_value;
  };
  std::vector<Cell> cells;
  for (int i = 0; i < spec.instances; ++i)
    for (int r = 0; r < spec.replicates; ++r)
      for (double g : spec.grid) cells.push_back({i, r, g});

  std::vector<std::vector<ResultRow>> results(cells.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell& cell = cells[idx];
      std::vector<ResultRow>& rows = results[idx];
      CellInputs in;
      try {
        in = prepare_cell(spec, master, cell.instance_id, cell.replicate_id, cell.sweep_value);
      } catch (const std::exception& e) {
        ResultRow row;
        row.spec_id = spec.id;
        row.model = "cell";
        row.instance_id = cell.instance_id;
        row.replicate_id = cell.replicate_id;
        row.status = std::string("error: ") + e.what();
        rows.push_back(std::move(row));
        continue;
      }
      SolveOptions sopt;
      sopt.time_limit = spec.time_limit;
      sopt.lex_tiebreak = spec.lex_tiebreak;

      // shared references across this cell's models
      std::optional<double> true_basic_value;
      auto need_rl_in = [&](const std::string& m) {
        return spec.want_rl_in &&
               (m == "semi-pessimistic" || m == "pessimistic-af" || m == "pessimistic-rn" ||
                m == "augmented-basic");
      };
      bool any_rl_in = false;
      for (const auto& m : spec.models) any_rl_in = any_rl_in || need_rl_in(m);
      if (any_rl_in) {
        try {
          auto tb = solve_model("true-basic", in.inst, in.sup, in.data_l, in.data_f, {}, in.cfg,
                                sopt);
          if (tb.status == SolveStatus::Optimal) true_basic_value = tb.objective;
        } catch (const std::exception&) {
        }
      }

      for (const auto& model : spec.models) {
        ResultRow row;
        row.spec_id = spec.id;
        row.model = model;
        row.instance_id = cell.instance_id;
        row.replicate_id = cell.replicate_id;
        row.sweep_var = spec.sweep_var;
        row.sweep_value = cell.sweep_value;
        row.n = in.inst.n;
        row.k_l = in.k_l;
        row.k_f = in.k_f;
        row.k_lf = in.run.k_lf;
        row.r_l = in.run.r_l;
        // the pessimistic families fix their defining parameter; the spec
        // config applies to the other models
        DroConfig mcfg = in.cfg;
        if (model == "pessimistic-af") mcfg.eps_l = 0.0;
        if (model == "pessimistic-rn") mcfg.alpha_l = 0.0;
        row.alpha_l = mcfg.alpha_l;
        row.alpha_f = mcfg.alpha_f;
        row.delta_l = in.run.delta_l;
        row.delta_f = in.run.delta_f;
        row.eps_l = mcfg.eps_l;
        row.eps_f = mcfg.eps_f;
        row.p = mcfg.p;
        row.kappa = in.run.kappa;
        row.seed = master;
        try {
          auto out = solve_model(model, in.inst, in.sup, in.data_l, in.data_f, in.scenarios,
                                 mcfg, sopt, FormulationStyle::Auto, &in.eval);
          row.status = to_string(out.status);
          row.iterations = out.iterations;
          row.wall_s = out.wall_s;
          if (out.status == SolveStatus::Optimal || out.status == SolveStatus::TimeLimit) {
            row.objective = out.objective;
            row.x = bits(out.x);
            const bool want_oos = spec.want_rl_f || spec.want_rl_l || spec.want_true_risk;
            if (in.eval.count() > 0 && want_oos) {
              // out-of-sample policy: the model's own response when it has
              // one, otherwise the full-information response at fixed x
              Vector ypol;
              if (out.has_y) {
                ypol = out.y;
              } else {
                auto fixed = full_information_leader(in.inst, in.sup, in.data_f, mcfg, in.eval,
                                                     &out.x, sopt);
                if (fixed.status == SolveStatus::Optimal) ypol = fixed.y;
              }
              if (ypol.size() == in.inst.n) {
                if (out.has_y && spec.want_rl_f)
                  row.rl_f = rl_f_out(in.inst, out.x, ypol, in.eval, mcfg.alpha_f);
                if (spec.want_rl_l)
                  row.rl_l = rl_l_out(in.inst, in.sup, out.x, ypol, in.data_f, mcfg, in.eval,
                                      out.has_y ? RlLeaderMode::Joint : RlLeaderMode::FixedX,
                                      sopt);
                if (spec.want_true_risk) {
                  const auto vals = portfolio_values(in.eval, ypol);
                  row.cvar_left_true = cvar_left(vals, 0.95);
                  row.mean_true = cvar_right(vals, 0.0);
                  row.cvar_right_true = cvar_right(vals, 0.95);
                }
              }
            }
            if (need_rl_in(model) && true_basic_value && *true_basic_value != 0.0)
              row.rl_in = rl_l_in(row.objective, *true_basic_value);
          }
        } catch (const PreconditionError& e) {
          row.status = std::string("precondition: ") + e.what();
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  };

  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<ResultRow> flat;
  for (auto& rs : results)
    for (auto& r : rs) flat.push_back(std::move(r));
  return flat;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = results_header();
  out += "\n";
  for (const auto& r : rows) out += r.csv() + "\n";
  return out;
}

// wall_s is the last column; drop it for determinism comparisons.
inline std::string strip_wall_column(const std::string& csv) {
  std::string out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out += line.substr(0, pos);
    out += "\n";
  }
  return out;
}

// ---- aggregation (figure CSVs) -----------------------------------------------------

// Nearest-rank percentile on a sorted-ascending copy.
inline double percentile_nearest_rank(std::vector<double> v, double pct) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const int rank = std::max(1, static_cast<int>(std::ceil(pct * v.size())));
  return v[rank - 1];
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double mad_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += std::abs(x - m);
  return s / v.size();
}

// One aggregate CSV per spec id: per (model, sweep value, metric) the mean,
// mean absolute deviation and empirical 5% percentile.
inline std::string aggregate_results(const std::string& results_csv_text) {
  std::istringstream in(results_csv_text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results CSV");
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int c_model = col("model"), c_val = col("sweep_value");
  const std::vector<std::pair<std::string, int>> metrics = {
      {"objective", col("objective")},       {"rl_f_out", col("rl_f_out")},
      {"rl_l_out", col("rl_l_out")},         {"rl_l_in", col("rl_l_in")},
      {"true_cvar_left", col("true_cvar_left")}, {"true_mean", col("true_mean")},
      {"true_cvar_right", col("true_cvar_right")}};
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const auto key = std::make_pair(cells.at(c_model), cells.at(c_val));
    for (const auto& [mname, mcol] : metrics) {
      if (mcol < 0 || cells.at(mcol).empty()) continue;
      groups[key][mname].push_back(parse_double(cells.at(mcol)));
    }
  }
  std::string out = "model,sweep_value,metric,count,mean,mad,p05\n";
  for (const auto& [key, mm] : groups)
    for (const auto& [mname, vals] : mm) {
      out += key.first + "," + key.second + "," + mname + "," + std::to_string(vals.size()) + "," +
             render_double(mean_of(vals)) + "," + render_double(mad_of(vals)) + "," +
             render_double(percentile_nearest_rank(vals, 0.05)) + "\n";
    }
  return out;
}

}  // namespace dri
