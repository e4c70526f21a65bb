#pragma once

// Linear readout y(t) = W_out x(t), trained in closed form by ridge
// regression  W_out = Y X^T (X X^T + lambda I)^-1.

#include <cmath>
#include <limits>
#include <mutex>
#include <span>
#include <string>

#include "crlab/dynamics.hpp"
#include "crlab/error.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

struct ReadoutWeights {
  Matrix w_out;  // N_Y x N_R
  double lambda_used = 0.0;
};

struct ErrorReport {
  double nmse = 0.0;
  double mse = 0.0;
  std::size_t sample_count = 0;
};

// Ridge problem for one design matrix, solvable for several lambdas.
// The Gram matrix X X^T and the cross term X Y^T are formed once and each
// lambda costs one Cholesky factorisation. When lambda is too small for
// Cholesky on X X^T to resolve (below about 1e4 * eps * trace), the solve goes
// through an SVD of a square root of X X^T instead, built once on demand:
// with X X^T = M M^T, X Y^T = M C and M = U S P^T,
//   W_out = C^T P S (S^2 + lambda)^-1 U^T.
class RidgeProblem {
 public:
  RidgeProblem(const Matrix& x, const Matrix& y_true) : x_(x), y_(y_true) {
    if (x.cols() != y_true.cols()) {
      throw DimensionError("train_ridge: states have " + std::to_string(x.cols()) +
                           " columns but targets have " + std::to_string(y_true.cols()));
    }
    if (x.rows() == 0 || y_true.rows() == 0) throw DimensionError("train_ridge: empty design");
    gram_ = Matrix::Zero(x.rows(), x.rows());
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(x);
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
    cross_ = x * y_true.transpose();
    small_lambda_ = 1e4 * std::numeric_limits<double>::epsilon() * gram_.trace();
  }

  const Matrix& gram() const { return gram_; }

  ReadoutWeights solve(double lambda) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw ConfigError("train_ridge: lambda must be finite and >= 0");
    }
    if (lambda > 0.0 && lambda < small_lambda_) return solve_spectral(lambda);
    Matrix a = gram_;
    a.diagonal().array() += lambda;
    try {
      return {solve_regularized(a, cross_).transpose(), lambda};
    } catch (const SingularSystemError& e) {
      if (lambda == 0.0) {
        throw SingularSystemError(
            "train_ridge: X X^T is singular with lambda = 0; choose lambda > 0");
      }
      throw;
    }
  }

 private:
  struct Spectral {
    Matrix u;       // N_R x r
    Vector sigma;   // r
    Matrix coeff;   // N_Y x r, C^T P
  };

  const Spectral& spectral() const {
    std::call_once(spectral_once_, [this] {
      Matrix m, c;
      if (x_.cols() > x_.rows()) {
        // X^T = Q R, so X X^T = R^T R and X Y^T = R^T (Q^T Y^T).
        const Eigen::HouseholderQR<Matrix> qr(x_.transpose());
        const Eigen::Index n = x_.rows();
        m = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().transpose();
        Matrix qty = y_.transpose();
        qty.applyOnTheLeft(qr.householderQ().transpose());
        c = qty.topRows(n);
      } else {
        m = x_;
        c = y_.transpose();
      }
      const Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      spectral_ = Spectral{svd.matrixU(), svd.singularValues(), c.transpose() * svd.matrixV()};
      x_.resize(0, 0);
      y_.resize(0, 0);
    });
    return spectral_;
  }

  ReadoutWeights solve_spectral(double lambda) const {
    const auto& s = spectral();
    const Vector filter = s.sigma.array() / (s.sigma.array().square() + lambda);
    Matrix w = (s.coeff * filter.asDiagonal()) * s.u.transpose();
    if (!w.allFinite()) throw SingularSystemError("train_ridge: solution is not finite");
    return {std::move(w), lambda};
  }

  mutable Matrix x_;
  mutable Matrix y_;
  Matrix gram_;
  Matrix cross_;
  double small_lambda_ = 0.0;
  mutable std::once_flag spectral_once_;
  mutable Spectral spectral_;
};

inline ReadoutWeights train_ridge(const Matrix& x, const Matrix& y_true, double lambda) {
  return RidgeProblem(x, y_true).solve(lambda);
}

inline ReadoutWeights train_ridge(const StateMatrix& x, const Matrix& y_true, double lambda) {
  return train_ridge(x.states, y_true, lambda);
}

inline Vector predict(const ReadoutWeights& w, const Vector& x) {
  if (x.size() != w.w_out.cols()) {
    throw DimensionError("predict: state has length " + std::to_string(x.size()) +
                         ", readout expects " + std::to_string(w.w_out.cols()));
  }
  return w.w_out * x;
}

inline Matrix predict(const ReadoutWeights& w, const Matrix& x) {
  if (x.rows() != w.w_out.cols()) {
    throw DimensionError("predict: states have " + std::to_string(x.rows()) +
                         " rows, readout expects " + std::to_string(w.w_out.cols()));
  }
  return w.w_out * x;
}

inline Matrix predict(const ReadoutWeights& w, const StateMatrix& x) { return predict(w, x.states); }

inline double mse(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size() || target.empty()) {
    throw DimensionError("mse: series must have equal, nonzero length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = predicted[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(target.size());
}

// Population variance.
inline double variance(std::span<const double> v) {
  if (v.empty()) throw DimensionError("variance: empty series");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return sum / static_cast<double>(v.size());
}

inline ErrorReport evaluate(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size() || target.size() < 2) {
    throw DimensionError("nmse: series must have equal length >= 2");
  }
  const double var = variance(target);
  if (!(var > 0.0)) throw Error("nmse: target series is constant (zero variance)");
  const double m = mse(predicted, target);
  return {m / var, m, target.size()};
}

inline double nmse(std::span<const double> predicted, std::span<const double> target) {
  return evaluate(predicted, target).nmse;
}

}  // namespace crlab
