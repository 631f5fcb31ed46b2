#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi::linalg {

/// Row-major dense matrix, just large enough for the desk-scale systems
/// solved here (the biggest is the (n+1)*n! oracle at small n).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Gaussian elimination with partial pivoting. Throws SingularSystem when a
/// pivot vanishes, which for the systems assembled in this library signals an
/// assembly bug rather than bad data.
inline std::vector<double> gaussian_solve(DenseMatrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "gaussian_solve: non-square system");
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      double mag = std::fabs(a(r, col));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (best == 0.0 || !std::isfinite(best)) {
      throw Error(ErrorCode::SingularSystem, "gaussian_solve: singular pivot",
                  static_cast<int>(col));
    }
    if (pivot != col) {
      for (std::size_t c = col; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv;
      if (f == 0.0) continue;
      a(r, col) = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
    x[i] = acc / a(i, i);
  }
  return x;
}

/// max-norm of A*x - b
inline double residual_maxnorm(const DenseMatrix& a, const std::vector<double>& x,
                               const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = -b[r];
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
    worst = std::max(worst, std::fabs(acc));
  }
  return worst;
}

}  // namespace aoi::linalg
