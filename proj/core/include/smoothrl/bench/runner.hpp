#pragma once

#include "smoothrl/bench/config.hpp"
#include "smoothrl/bench/records.hpp"

#include <functional>
#include <string_view>

namespace smoothrl::bench {

struct RunnerOptions {
  /// Receives one human-readable line per event; called under a lock.
  std::function<void(std::string_view)> log;
};

struct BenchmarkSummary {
  std::vector<RunRecord> records;  // expand() order
  int trained = 0;
  int skipped = 0;
  int failed = 0;
};

/// Trains and evaluates one run and writes its curve, checkpoint and traces.
/// Failures are captured in the returned record instead of thrown.
RunRecord execute_run(const BenchmarkConfig& config, const RunKey& key);

/// Runs every grid cell whose record is missing, failed or stale (hash
/// mismatch) on `config.workers` threads. Each record is written atomically
/// as soon as its run finishes.
BenchmarkSummary run_benchmark(const BenchmarkConfig& config, const RunnerOptions& options = {});

}  // namespace smoothrl::bench
