#include "smoothrl/bench/runner.hpp"

#include "smoothrl/bench/traces.hpp"
#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"
#include "smoothrl/metrics/evaluate.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>

namespace smoothrl::bench {

RunRecord execute_run(const BenchmarkConfig& config, const RunKey& key) {
  RunRecord rec;
  rec.env = key.env;
  rec.method = key.method;
  rec.seed = key.seed;
  rec.hash = run_hash(config, key);
  const auto& out = config.output_dir;
  const std::string id = key.id();
  try {
    ppo::TrainSpec spec;
    spec.env = key.env;
    spec.method = config.method_for(key.method);
    spec.ppo = config.ppo_for(key.env);
    spec.randomization = config.randomization_for(key.env);
    spec.seed = key.seed;
    spec.diagnostic_dir = out / "diagnostics" / id;

    const auto t0 = std::chrono::steady_clock::now();
    ppo::TrainResult result = ppo::train(spec);
    rec.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.steps = result.steps;

    rec.curve_path = "curves/" + id + ".csv";
    ppo::write_training_curve(out / rec.curve_path, result.curve);
    const ad::Checkpoint ckpt = result.policy.checkpoint();
    rec.checkpoint_path = "checkpoints/" + id + ".ckpt";
    ad::save_checkpoint(out / rec.checkpoint_path, ckpt);
    rec.checkpoint_hash = ad::checkpoint_hash(ckpt);

    const auto e = metrics::evaluate(result.policy, key.env, config.eval_episodes, key.seed);
    rec.episodes = e.episodes;
    rec.return_mean = e.return_mean;
    rec.return_std = e.return_std;
    rec.sm_mean = e.sm_mean;
    rec.sm_std = e.sm_std;
    rec.returns = e.returns;
    rec.sms = e.sms;

    if (config.traces.episodes > 0) {
      write_traces(result.policy, key.env, config.traces.episodes, key.seed, out / "traces" / id,
                   config.traces.spectrum);
    }
  } catch (const Error& e) {
    rec.status = "failed";
    rec.error_kind = e.kind();
    rec.error_message = e.what();
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.error_kind = "internal";
    rec.error_message = e.what();
  }
  return rec;
}

BenchmarkSummary run_benchmark(const BenchmarkConfig& config, const RunnerOptions& options) {
  config.validate();
  const auto& out = config.output_dir;
  std::filesystem::create_directories(out / "runs");
  nlohmann::json manifest{{"format_version", kFormatVersion}, {"kind", "smoothrl-benchmark"}};
  write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");

  std::mutex mu;
  auto log = [&](const std::string& line) {
    if (!options.log) return;
    std::lock_guard lock(mu);
    options.log(line);
  };

  const auto keys = expand(config);
  BenchmarkSummary summary;
  summary.records.resize(keys.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto existing = read_record(record_path(out, keys[i]));
    if (existing && existing->ok() && existing->hash == run_hash(config, keys[i])) {
      summary.records[i] = *existing;
      ++summary.skipped;
    } else {
      pending.push_back(i);
    }
  }
  log("grid: " + std::to_string(keys.size()) + " runs, " + std::to_string(summary.skipped) + " already done, " +
      std::to_string(pending.size()) + " to run on " + std::to_string(config.workers) + " worker(s)");

  std::atomic<std::size_t> next{0};
  std::atomic<int> done{0};
  std::exception_ptr io_failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t i = pending[slot];
      log("start " + keys[i].id());
      RunRecord rec = execute_run(config, keys[i]);
      try {
        write_record(out, rec);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!io_failure) io_failure = std::current_exception();
        return;
      }
      const int finished = ++done;
      char line[256];
      if (rec.ok()) {
        std::snprintf(line, sizeof line, "[%d/%zu] %s return %.1f sm %.4g (%.0fs)", finished, pending.size(),
                      keys[i].id().c_str(), rec.return_mean, rec.sm_mean, rec.train_seconds);
      } else {
        std::snprintf(line, sizeof line, "[%d/%zu] %s FAILED (%s)", finished, pending.size(), keys[i].id().c_str(),
                      rec.error_kind.c_str());
      }
      log(std::string(line) + (rec.ok() ? "" : ": " + rec.error_message));
      summary.records[i] = std::move(rec);
    }
  };
  const int threads = std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (io_failure) std::rethrow_exception(io_failure);

  for (std::size_t slot = 0; slot < pending.size(); ++slot) {
    const auto& r = summary.records[pending[slot]];
    r.ok() ? ++summary.trained : ++summary.failed;
  }
  return summary;
}

}  // namespace smoothrl::bench
