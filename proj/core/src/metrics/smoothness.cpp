#include "smoothrl/metrics/smoothness.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>

namespace smoothrl::metrics {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> amplitudes(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    return std::vector<double>(static_cast<std::size_t>(n / 2), 0.0);
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  std::vector<double> in(x);
  for (double& v : in) v -= mean;
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> m(static_cast<std::size_t>(n / 2));
  for (int i = 1; i <= n / 2; ++i) {
    const bool nyquist = 2 * i == n;
    m[static_cast<std::size_t>(i - 1)] = (nyquist ? 1.0 : 2.0) / n * std::abs(out[static_cast<std::size_t>(i)]);
  }
  return m;
}

}  // namespace

SmoothnessSpectrum smoothness(const std::vector<std::vector<double>>& trace, double f_s) {
  const std::size_t len = trace.size();
  if (len < kMinTraceLength) {
    throw InputError("smoothness: trace length " + std::to_string(len) + " is below " +
                     std::to_string(kMinTraceLength));
  }
  if (!(f_s > 0.0) || !std::isfinite(f_s)) throw InputError("smoothness: sampling frequency must be positive");
  const std::size_t dims = trace[0].size();
  if (dims == 0) throw InputError("smoothness: trace has no dimensions");
  for (const auto& row : trace) {
    if (row.size() != dims) throw InputError("smoothness: ragged trace");
    for (double v : row) {
      if (!std::isfinite(v)) throw InputError("smoothness: non-finite value in trace");
    }
  }

  SmoothnessSpectrum s;
  s.f_s = f_s;
  s.n = static_cast<int>(len / 2);
  const double n = s.n;
  const double big_n = static_cast<double>(len);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> x(len);
    for (std::size_t t = 0; t < len; ++t) x[t] = trace[t][d];
    DimensionSpectrum ds;
    ds.amplitude = amplitudes(x);
    double weighted = 0.0;
    for (int i = 1; i <= s.n; ++i) {
      const double f = static_cast<double>(i) * f_s / big_n;
      ds.freq_hz.push_back(f);
      weighted += ds.amplitude[static_cast<std::size_t>(i - 1)] * f;
    }
    ds.sm = 2.0 / (n * f_s) * weighted;
    s.sm += ds.sm;
    s.dims.push_back(std::move(ds));
  }
  s.sm /= static_cast<double>(dims);
  return s;
}

SmoothnessSpectrum smoothness(std::span<const double> signal, double f_s) {
  std::vector<std::vector<double>> trace;
  trace.reserve(signal.size());
  for (double v : signal) trace.push_back({v});
  return smoothness(trace, f_s);
}

void write_spectrum_csv(const std::filesystem::path& path, const SmoothnessSpectrum& spectrum) {
  const bool multi = spectrum.dims.size() > 1;
  std::string out = multi ? "dim,freq_hz,amplitude\n" : "freq_hz,amplitude\n";
  char buf[64];
  auto num = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  for (std::size_t d = 0; d < spectrum.dims.size(); ++d) {
    const auto& ds = spectrum.dims[d];
    for (std::size_t i = 0; i < ds.freq_hz.size(); ++i) {
      if (multi) out += std::to_string(d) + ",";
      out += num(ds.freq_hz[i]) + "," + num(ds.amplitude[i]) + "\n";
    }
  }
  write_file_atomic(path, out);
}

double cumulative_return(std::span<const double> rewards) {
  if (rewards.empty()) throw InputError("cumulative_return: empty reward trace");
  double c = 0.0;
  for (double r : rewards) c += r;
  return c;
}

}  // namespace smoothrl::metrics
