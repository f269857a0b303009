// smoothbench: train, evaluate, report and trace smooth-control benchmarks.

#include "smoothrl/bench/config.hpp"
#include "smoothrl/bench/report.hpp"
#include "smoothrl/bench/runner.hpp"
#include "smoothrl/bench/traces.hpp"
#include "smoothrl/error.hpp"
#include "smoothrl/metrics/evaluate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

using namespace smoothrl;
using nlohmann::json;

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
  return code;
}

std::string check_method(const std::string& name) {
  try {
    regularizers::MethodSpec::parse(name);
    return {};
  } catch (const ConfigError& e) {
    return e.what();
  }
}

std::string check_env(const std::string& name) {
  const auto names = envs::environment_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) return {};
  std::string all;
  for (const auto& n : names) all += (all.empty() ? "" : " | ") + n;
  return "unknown environment '" + name + "'; expected " + all;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> envs, methods;
  std::string seeds;
  long steps = 0;
  std::string out;
  bool dr = false;
  int workers = 0;
  int eval_episodes = 0;
  int traces = -1;
  bool spectrum = false;
  bool quiet = false;
};

int run_train(const TrainArgs& a, const CLI::App& cmd) {
  bench::BenchmarkConfig c = a.config.empty() ? bench::BenchmarkConfig{} : bench::load_config(a.config);
  if (cmd.count("--env")) c.envs = a.envs;
  if (cmd.count("--method")) c.methods = a.methods;
  if (cmd.count("--seeds")) c.seeds = bench::parse_seeds(a.seeds);
  if (cmd.count("--steps")) {
    c.steps.clear();
    for (const auto& e : c.envs) c.steps[e] = a.steps;
  }
  if (cmd.count("--out")) c.output_dir = a.out;
  if (cmd.count("--dr")) c.randomization = true;
  if (cmd.count("--workers")) c.workers = a.workers;
  if (cmd.count("--eval-episodes")) c.eval_episodes = a.eval_episodes;
  if (cmd.count("--traces")) c.traces.episodes = a.traces;
  if (cmd.count("--spectrum")) c.traces.spectrum = true;
  c.validate();

  bench::RunnerOptions opts;
  if (!a.quiet) opts.log = [](std::string_view line) { std::cerr << line << std::endl; };
  const auto summary = bench::run_benchmark(c, opts);
  const auto files = bench::render_report(c.output_dir, c.methods, c.envs);
  std::cout << files.text;
  std::cout << json{{"trained", summary.trained},
                    {"skipped", summary.skipped},
                    {"failed", summary.failed},
                    {"records", summary.records.size()},
                    {"report", files.table_csv.string()}}
                   .dump()
            << std::endl;
  if (summary.failed > 0) {
    return fail("run_failed",
                std::to_string(summary.failed) + " run(s) failed; see the records under " +
                    (c.output_dir / "runs").string(),
                1);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, evaluate and compare smooth-control policies."};
  app.require_subcommand(1);

  TrainArgs t;
  auto* train = app.add_subcommand("train", "Train and evaluate a method x env x seed grid, then render the report");
  train->add_option("--config", t.config, "YAML benchmark config")->check(CLI::ExistingFile);
  train->add_option("--env", t.envs, "Environment(s): pendulum | reacher")->check(check_env);
  train->add_option("--method", t.methods, "Method(s): " + std::string(regularizers::method_grammar()))
      ->check(check_method);
  train->add_option("--seeds", t.seeds, "Seed count N (seeds 0..N-1) or a list such as 0,4,7");
  train->add_option("--steps", t.steps, "Training steps per run")->check(CLI::PositiveNumber);
  train->add_option("--out", t.out, "Output directory");
  train->add_flag("--dr", t.dr, "Train with domain randomization");
  train->add_option("--workers", t.workers, "Parallel runs")->check(CLI::PositiveNumber);
  train->add_option("--eval-episodes", t.eval_episodes, "Evaluation episodes per run")->check(CLI::PositiveNumber);
  train->add_option("--traces", t.traces, "Action traces to dump per run")->check(CLI::NonNegativeNumber);
  train->add_flag("--spectrum", t.spectrum, "Also dump spectra of the traced episodes");
  train->add_flag("--quiet", t.quiet, "No progress lines on stderr");

  std::string ckpt, env = "pendulum", out = "results";
  int episodes = 100;
  std::uint64_t seed = 0;
  bool spectrum = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint; prints a JSON record");
  eval->add_option("--checkpoint", ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--env", env, "Environment")->check(check_env);
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "Evaluation seed");

  std::vector<std::string> report_envs, report_methods;
  auto* report = app.add_subcommand("report", "Render table and curves from existing records");
  report->add_option("--out", out, "Output directory holding runs/");
  report->add_option("--env", report_envs, "Restrict/order environments")->check(check_env);
  report->add_option("--method", report_methods, "Restrict/order methods")->check(check_method);

  std::string trace_out = "traces";
  int trace_episodes = 1;
  auto* trace = app.add_subcommand("trace", "Dump per-episode action traces of a checkpoint");
  trace->add_option("--checkpoint", ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  trace->add_option("--env", env, "Environment")->check(check_env);
  trace->add_option("--episodes", trace_episodes, "Episodes")->check(CLI::PositiveNumber);
  trace->add_option("--seed", seed, "Evaluation seed");
  trace->add_option("--out", trace_out, "Output directory");
  trace->add_flag("--spectrum", spectrum, "Also write freq_hz,amplitude spectra");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*train) return run_train(t, *train);
    if (*eval) {
      const auto policy = policies::ActorCritic::from_checkpoint(ad::load_checkpoint(ckpt));
      const auto e = metrics::evaluate(policy, env, episodes, seed);
      std::cout << json{{"format_version", bench::kFormatVersion},
                        {"env", env},
                        {"checkpoint", ckpt},
                        {"seed", seed},
                        {"episodes", e.episodes},
                        {"return_mean", e.return_mean},
                        {"return_std", e.return_std},
                        {"sm_mean", e.sm_mean},
                        {"sm_std", e.sm_std}}
                       .dump()
                << std::endl;
      return 0;
    }
    if (*report) {
      std::cout << bench::render_report(out, report_methods, report_envs).text;
      return 0;
    }
    if (*trace) {
      const auto policy = policies::ActorCritic::from_checkpoint(ad::load_checkpoint(ckpt));
      const auto s = bench::write_traces(policy, env, trace_episodes, seed, trace_out, spectrum);
      std::cout << json{{"dir", trace_out}, {"returns", s.returns}, {"sms", s.sms}}.dump() << std::endl;
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail(e.kind(), e.what(), 2);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
