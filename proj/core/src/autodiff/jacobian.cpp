#include "smoothrl/autodiff/jacobian.hpp"

#include "smoothrl/autodiff/ops.hpp"
#include "smoothrl/error.hpp"

#include <Eigen/Eigenvalues>

namespace smoothrl::ad {

std::vector<Tensor> jacobian_rows(const Tensor& y, const Tensor& x) {
  if (!x.requires_grad()) throw InputError("jacobian: input must require grad");
  if (y.rows() != x.rows()) {
    throw DimensionError("jacobian: batch sizes differ, " + to_string(y.shape()) + " vs " + to_string(x.shape()));
  }
  std::vector<Tensor> rows;
  rows.reserve(static_cast<std::size_t>(y.cols()));
  for (Index k = 0; k < y.cols(); ++k) {
    const Tensor yk = y.cols() == 1 ? y : slice_cols(y, k, 1);
    rows.push_back(grad(sum(yk), {x}, {.create_graph = true})[0]);
  }
  return rows;
}

Tensor jacobian_2norm(const Tensor& y, const Tensor& x) {
  const std::vector<Tensor> jac = jacobian_rows(y, x);
  const Index batch = x.rows(), n = x.cols();
  const Index m = static_cast<Index>(jac.size());

  Matrix directions = Matrix::Zero(batch, n);
  Eigen::MatrixXd jb(m, n);
  for (Index b = 0; b < batch; ++b) {
    for (Index k = 0; k < m; ++k) jb.row(k) = jac[static_cast<std::size_t>(k)].value().row(b);
    Eigen::VectorXd v;
    if (m == 1) {
      v = jb.row(0).transpose();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jb * jb.transpose());
      v = jb.transpose() * eig.eigenvectors().col(m - 1);
    }
    const double norm = v.norm();
    if (norm > 0.0) directions.row(b) = (v / norm).transpose();
  }

  const Tensor dir(std::move(directions));
  Tensor squared;
  for (const auto& jk : jac) {
    const Tensor s = square(sum_rows(mul(jk, dir)));
    squared = squared.defined() ? add(squared, s) : s;
  }
  return sqrt(squared);
}

Tensor jacobian_2norm(Tape& tape, const std::function<Tensor(const Tensor&)>& f, const Matrix& x) {
  const Tensor input = tape.variable(x);
  return jacobian_2norm(f(input), input);
}

}  // namespace smoothrl::ad
