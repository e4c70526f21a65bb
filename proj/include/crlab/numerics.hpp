#pragma once

// Dense linear algebra used across the library. Storage and kernels are
// Eigen's; this header pins down the contracts (dimension checks, SPD solve,
// full spectrum) the rest of the code relies on.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "crlab/error.hpp"

namespace crlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexSpectrum = std::vector<std::complex<double>>;

namespace detail {

inline std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         shape(m));
  }
}

}  // namespace detail

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline Vector mat_vec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw DimensionError("mat_vec: matrix is " + detail::shape(m) + " but vector has length " +
                         std::to_string(v.size()));
  }
  return m * v;
}

// Solves A Z = B for symmetric positive definite A (the ridge normal
// equations X X^T + lambda I). Throws SingularSystemError when A is not
// numerically positive definite, which for lambda = 0 means X X^T is singular.
inline Matrix solve_regularized(const Matrix& a, const Matrix& b) {
  detail::require_square(a, "solve_regularized");
  if (b.rows() != a.rows()) {
    throw DimensionError("solve_regularized: system is " + detail::shape(a) +
                         " but right-hand side is " + detail::shape(b));
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError(
        "solve_regularized: matrix is not invertible (not positive definite); "
        "use a ridge parameter lambda > 0");
  }
  Matrix z = llt.solve(b);
  if (!z.allFinite()) {
    throw SingularSystemError("solve_regularized: solution is not finite");
  }
  return z;
}

inline ComplexSpectrum eigenvalues(const Matrix& m) {
  detail::require_square(m, "eigenvalues");
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error("eigenvalues: QR iteration did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return ComplexSpectrum(ev.data(), ev.data() + ev.size());
}

inline double spectral_radius(const Matrix& m) {
  double radius = 0.0;
  for (const auto& z : eigenvalues(m)) radius = std::max(radius, std::abs(z));
  return radius;
}

// Row-compressed copy of a dense matrix, used by the state update where
// cycle reservoirs carry only a few nonzeros per row. Rows sum their
// nonzeros in increasing column order.
class SparseRows {
 public:
  SparseRows() = default;

  explicit SparseRows(const Matrix& m) : rows_(m.rows()), cols_(m.cols()) {
    row_start_.reserve(static_cast<std::size_t>(rows_) + 1);
    row_start_.push_back(0);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (m(i, j) != 0.0) {
          col_.push_back(static_cast<int>(j));
          val_.push_back(m(i, j));
        }
      }
      row_start_.push_back(col_.size());
    }
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::size_t nonzeros() const { return val_.size(); }

  // out(i) += sum_j M(i, j) * x(j)
  void accumulate(const double* x, double* out) const {
    for (Eigen::Index i = 0; i < rows_; ++i) {
      double acc = out[i];
      for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
      out[i] = acc;
    }
  }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<int> col_;
  std::vector<double> val_;
};

}  // namespace crlab
