#pragma once

#include "smoothrl/bench/records.hpp"
#include "smoothrl/ppo/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace smoothrl::bench {

/// Aggregate over the seeds of one (method, env) pair. Means are taken over
/// per-seed evaluation means; stds are sample (n−1) stds across seeds.
struct Cell {
  int seeds = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double sm_mean = 0.0;
  double sm_std = 0.0;
  bool best_return = false;
  bool best_sm = false;
};

struct ReportTable {
  std::vector<std::string> methods;
  std::vector<std::string> envs;
  std::vector<std::vector<std::optional<Cell>>> cells;  // [method][env]

  const std::optional<Cell>& at(std::size_t method, std::size_t env) const { return cells[method][env]; }
};

/// Failed records are ignored. When `methods` or `envs` is empty they are
/// taken from the records in canonical order. Best markers: highest mean
/// return and lowest mean Sm per env, ties going to the lower std.
ReportTable build_table(const std::vector<RunRecord>& records, std::vector<std::string> methods = {},
                        std::vector<std::string> envs = {});

/// Two blocks (return, Sm) of `mean ± std`; best cells carry a `*`, missing cells "—".
std::string format_text(const ReportTable& table);
std::string format_csv(const ReportTable& table);

struct SeedCurve {
  std::uint64_t seed = 0;
  std::vector<ppo::CurveRow> rows;
};

/// Episode-return curves, one thin line per seed plus their mean.
std::string render_curves_svg(const std::string& title, const std::vector<SeedCurve>& curves);

struct ReportFiles {
  std::string text;
  std::filesystem::path table_txt, table_csv;
  std::vector<std::filesystem::path> plots;
};

/// Reads `<out>/runs`, writes `<out>/report/table.txt`, `table.csv` and
/// `curves/<env>__<method>.svg`. Never retrains.
ReportFiles render_report(const std::filesystem::path& out_dir, const std::vector<std::string>& methods = {},
                          const std::vector<std::string>& envs = {});

}  // namespace smoothrl::bench
