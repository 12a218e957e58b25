// Command-line front end: single solves, batch experiments, figure
// aggregation, and instance generation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <dri/experiment.hpp>
#include <dri/instance.hpp>
#include <dri/instance_gen.hpp>
#include <dri/io.hpp>
#include <dri/scenario.hpp>
#include <dri/solve.hpp>

namespace {

using namespace dri;

nlohmann::json result_json(const ModelOutcome& out) {
  nlohmann::json j;
  j["status"] = to_string(out.status);
  if (out.status == SolveStatus::Optimal || out.status == SolveStatus::TimeLimit) {
    j["objective"] = out.objective;
    nlohmann::json xs = nlohmann::json::array();
    for (int i = 0; i < out.x.size(); ++i) xs.push_back(std::lround(out.x[i]));
    j["x"] = std::move(xs);
    if (out.has_y) {
      nlohmann::json ys = nlohmann::json::array();
      for (int i = 0; i < out.y.size(); ++i) ys.push_back(out.y[i]);
      j["y"] = std::move(ys);
    }
  }
  j["wall_s"] = out.wall_s;
  j["iterations"] = out.iterations;
  if (!out.note.empty()) j["note"] = out.note;
  return j;
}

int cmd_solve(const std::string& model, const std::string& instance_path,
              const std::string& leader_path, const std::string& follower_path,
              const std::string& config_path, const std::string& scenarios_arg,
              const std::string& box_path, std::uint64_t seed, double time_limit,
              const std::string& out_path, const std::string& trace_path,
              const std::string& lp_path) {
  try {
    auto [inst, sup] = instance_from_json(nlohmann::json::parse(read_file(instance_path)));
    SampleSet data_l, data_f;
    data_l.samples = read_data_csv(leader_path);
    data_f.owner = DataOwner::Follower;
    data_f.samples = follower_path.empty() ? data_l.samples : read_data_csv(follower_path);
    RunConfig run;
    if (!config_path.empty())
      run = run_config_from_json(nlohmann::json::parse(read_file(config_path)));
    DroConfig cfg = run.dro(data_l.count(), data_f.count());

    std::vector<SampleSet> scenarios;
    if (!scenarios_arg.empty()) {
      std::string cur;
      std::istringstream ss(scenarios_arg);
      while (std::getline(ss, cur, ',')) {
        SampleSet sc;
        sc.owner = DataOwner::Follower;
        sc.samples = read_data_csv(cur);
        scenarios.push_back(std::move(sc));
      }
    } else if (!box_path.empty()) {
      auto box = box_from_json(nlohmann::json::parse(read_file(box_path)));
      scenarios = sample_scenarios(box, run.r_l, ScenarioStreamKey{seed, 0, 0});
    }

    SolveOptions sopt;
    sopt.time_limit = time_limit;
    sopt.lex_tiebreak = true;
    MilpModel built;
    auto out = solve_model(model, inst, sup, data_l, data_f, scenarios, cfg, sopt,
                           FormulationStyle::Auto, nullptr, lp_path.empty() ? nullptr : &built);
    if (!lp_path.empty() && built.num_vars() > 0) write_file(lp_path, built.to_lp_format());
    if (!trace_path.empty() && !out.trace.empty()) write_file(trace_path, trace_csv(out.trace));
    const std::string text = result_json(out).dump(2) + "\n";
    if (out_path.empty())
      std::fputs(text.c_str(), stdout);
    else
      write_file(out_path, text);
    return out.status == SolveStatus::Optimal ? 0 : 1;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "precondition violated: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "input parse error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_experiment(const std::string& spec_path, std::uint64_t seed, int jobs,
                   const std::string& out_path, double time_limit_override) {
  try {
    auto spec = spec_from_json(nlohmann::json::parse(read_file(spec_path)));
    if (time_limit_override > 0) spec.time_limit = time_limit_override;
    auto rows = run_experiment(spec, seed, jobs);
    write_file(out_path, results_csv(rows));
    std::fprintf(stdout, "wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return 0;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "spec parse error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_emit_plots(const std::string& results_path, const std::string& out_dir) {
  try {
    const std::string csv = read_file(results_path);
    // figure id = the spec_id column of the first data row
    std::istringstream in(csv);
    std::string header, first;
    std::getline(in, header);
    std::string fig = "results";
    if (std::getline(in, first) && !first.empty()) fig = split_csv_line(first).front();
    std::filesystem::create_directories(out_dir);
    const std::string out_path = out_dir + "/" + fig + "_agg.csv";
    write_file(out_path, aggregate_results(csv));
    std::fprintf(stdout, "wrote %s\n", out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_gen(int n, int d_l, int d_f, std::uint64_t seed, const std::string& out_path, int k_l,
            int k_f, const std::string& data_out, const std::string& variance_mode) {
  try {
    Rng irng(derive_seed(seed, {kInstanceStream, 0}));
    auto inst = gen_packing_instance(n, d_l, d_f, irng);
    auto sup = unit_support(n);
    write_file(out_path, instance_to_json(inst, sup).dump(2) + "\n");
    std::fprintf(stdout, "wrote %s\n", out_path.c_str());
    if (k_l > 0) {
      auto sampler = TruncNormalSampler::make(
          n, variance_mode == "inverse" ? VarianceMode::Inverse : VarianceMode::Proportional);
      Rng drng(derive_seed(seed, {kDatasetStream, 0, 0}));
      auto [dl, df] = draw_datasets(sampler, k_l, k_f > 0 ? k_f : k_l, drng);
      write_data_csv(data_out + "_leader.csv", dl.samples);
      write_data_csv(data_out + "_follower.csv", df.samples);
      std::fprintf(stdout, "wrote %s_leader.csv and %s_follower.csv\n", data_out.c_str(),
                   data_out.c_str());
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-driven distributionally robust interdiction models"};
  app.require_subcommand(1);

  std::string model, instance_path, leader_path, follower_path, config_path;
  std::string scenarios_arg, box_path, out_path, trace_path;
  std::uint64_t seed = 1;
  double time_limit = 3600.0;
  auto* solve = app.add_subcommand("solve", "solve one model on one instance");
  solve->add_option("--model", model,
                    "basic|true-basic|semi-pessimistic|pessimistic-af|pessimistic-rn")
      ->required();
  solve->add_option("--instance", instance_path, "instance JSON")->required();
  solve->add_option("--leader-data", leader_path, "leader data CSV")->required();
  solve->add_option("--follower-data", follower_path, "follower data CSV");
  solve->add_option("--config", config_path, "config JSON");
  solve->add_option("--scenarios", scenarios_arg, "comma-separated scenario CSVs");
  solve->add_option("--box", box_path, "follower data box JSON");
  solve->add_option("--seed", seed, "seed for box scenario sampling");
  solve->add_option("--time-limit", time_limit, "seconds");
  solve->add_option("--out", out_path, "write result JSON here instead of stdout");
  solve->add_option("--trace", trace_path, "write the Benders trace CSV here");
  std::string lp_path;
  solve->add_option("--export-lp", lp_path, "write the built model in LP text format");

  std::string spec_path, results_path, out_dir = "agg";
  int jobs = 1;
  double exp_time_limit = 0.0;
  auto* experiment = app.add_subcommand("experiment", "run a batch experiment spec");
  experiment->add_option("--spec", spec_path, "experiment spec JSON")->required();
  experiment->add_option("--seed", seed, "master seed");
  experiment->add_option("--jobs", jobs, "worker threads");
  experiment->add_option("--out", out_path, "results CSV path")->required();
  experiment->add_option("--time-limit", exp_time_limit, "per-solve limit override (s)");

  auto* plots = app.add_subcommand("emit-plots", "aggregate a results CSV for plotting");
  plots->add_option("--results", results_path, "results CSV")->required();
  plots->add_option("--out-dir", out_dir, "output directory");

  int n = 10, d_l = 1, d_f = 10, k_l = 0, k_f = 0;
  std::string data_out = "data", variance_mode = "proportional";
  auto* gen = app.add_subcommand("gen", "generate a packing instance (and data sets)");
  gen->add_option("--n", n, "follower variables");
  gen->add_option("--d-l", d_l, "leader constraint rows");
  gen->add_option("--d-f", d_f, "follower packing rows");
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--out", out_path, "instance JSON path")->required();
  gen->add_option("--k-l", k_l, "leader samples to draw");
  gen->add_option("--k-f", k_f, "follower samples (prefix of the leader's)");
  gen->add_option("--data-out", data_out, "dataset CSV path prefix");
  gen->add_option("--variance-mode", variance_mode, "proportional|inverse");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed())
    return cmd_solve(model, instance_path, leader_path, follower_path, config_path, scenarios_arg,
                     box_path, seed, time_limit, out_path, trace_path, lp_path);
  if (experiment->parsed()) return cmd_experiment(spec_path, seed, jobs, out_path, exp_time_limit);
  if (plots->parsed()) return cmd_emit_plots(results_path, out_dir);
  if (gen->parsed())
    return cmd_gen(n, d_l, d_f, seed, out_path, k_l, k_f, data_out, variance_mode);
  return 1;
}
