#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace smoothrl::metrics {

/// One-sided amplitude spectrum of a single action dimension.
struct DimensionSpectrum {
  std::vector<double> freq_hz;    // f_i = i·f_s/N, i = 1..n
  std::vector<double> amplitude;  // M_i
  double sm = 0.0;
};

struct SmoothnessSpectrum {
  double f_s = 0.0;
  int n = 0;  // floor(N/2)
  std::vector<DimensionSpectrum> dims;
  /// Mean of the per-dimension values.
  double sm = 0.0;
};

inline constexpr int kMinTraceLength = 8;

/// Sm = 2/(n·f_s)·Σ M_i f_i per dimension, averaged over dimensions.
/// `trace[t][d]` is action dimension d at step t. M_i = (2/N)|X_i| for
/// 0 < i < N/2 and (1/N)|X_i| at the Nyquist bin; DC is excluded.
/// Throws InputError when N < 8, the trace is ragged or values are not finite.
SmoothnessSpectrum smoothness(const std::vector<std::vector<double>>& trace, double f_s);
/// Single-dimension convenience form.
SmoothnessSpectrum smoothness(std::span<const double> signal, double f_s);

/// `freq_hz,amplitude` rows; multi-dimensional spectra add a leading `dim` column.
void write_spectrum_csv(const std::filesystem::path& path, const SmoothnessSpectrum& spectrum);

/// C = Σ R_t. Throws InputError on an empty trace.
double cumulative_return(std::span<const double> rewards);

}  // namespace smoothrl::metrics
