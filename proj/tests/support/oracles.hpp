#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include "smoothrl/autodiff/tensor.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace smoothrl::testing {

using ad::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -2.0,
                            double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

/// Central-difference gradient of a scalar function of one matrix argument.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f(x);
    x.data()[i] = keep - h;
    const double down = f(x);
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of f: R^n → R^m at x (1×n), returned m×n.
inline Matrix finite_difference_jacobian(const std::function<Matrix(const Matrix&)>& f, Matrix x,
                                         double h = 1e-6) {
  const Matrix y0 = f(x);
  Matrix jac(y0.cols(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double keep = x(0, j);
    x(0, j) = keep + h;
    const Matrix up = f(x);
    x(0, j) = keep - h;
    const Matrix down = f(x);
    x(0, j) = keep;
    jac.col(j) = ((up - down) / (2.0 * h)).transpose();
  }
  return jac;
}

inline double spectral_norm_svd(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd dense = m;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
  return svd.singularValues()(0);
}

/// Largest relative error between two matrices, |a-b| / max(|a|, |b|, floor).
inline double max_relative_error(const Matrix& a, const Matrix& b, double floor = 1e-2) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), floor}));
  }
  return worst;
}

/// O(N²) discrete Fourier transform, X_k = Σ x_t e^{-2πikt/N}.
inline std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

/// Sm = 2/(n f_s) Σ M_i f_i with amplitudes from a direct DFT.
inline double direct_sm(const std::vector<double>& x, double f_s, std::vector<double>* amps = nullptr) {
  const std::size_t big_n = x.size(), n = big_n / 2;
  const auto spec = direct_dft(x);
  double acc = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double m = (2 * i == big_n ? 1.0 : 2.0) / static_cast<double>(big_n) * std::abs(spec[i]);
    if (amps) amps->push_back(m);
    acc += m * static_cast<double>(i) * f_s / static_cast<double>(big_n);
  }
  return 2.0 / (static_cast<double>(n) * f_s) * acc;
}

}  // namespace smoothrl::testing
