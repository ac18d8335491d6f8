#ifndef CIRCLELAB_MATRIX_HPP_
#define CIRCLELAB_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace circlelab {

// Minimal dense row-major matrix. The networks here are a few thousand
// parameters, so plain loops keep the arithmetic order (and therefore the
// determinism contract) obvious.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return std::span<double>(data).subspan(static_cast<std::size_t>(r) * cols, cols);
  }
  std::span<const double> row(int r) const {
    return std::span<const double>(data).subspan(static_cast<std::size_t>(r) * cols, cols);
  }

  void set_zero() { data.assign(data.size(), 0.0); }
};

// y = A x
inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  for (int r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    const double* row = a.data.data() + static_cast<std::size_t>(r) * a.cols;
    for (int c = 0; c < a.cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

// y = A^T x
inline void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  for (int c = 0; c < a.cols; ++c) y[static_cast<std::size_t>(c)] = 0.0;
  for (int r = 0; r < a.rows; ++r) {
    const double xr = x[static_cast<std::size_t>(r)];
    const double* row = a.data.data() + static_cast<std::size_t>(r) * a.cols;
    for (int c = 0; c < a.cols; ++c) y[static_cast<std::size_t>(c)] += row[c] * xr;
  }
}

// A += scale * (u v^T)
inline void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v,
                      double scale) {
  for (int r = 0; r < a.rows; ++r) {
    const double ur = scale * u[static_cast<std::size_t>(r)];
    double* row = a.data.data() + static_cast<std::size_t>(r) * a.cols;
    for (int c = 0; c < a.cols; ++c) row[c] += ur * v[static_cast<std::size_t>(c)];
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

}  // namespace circlelab

#endif  // CIRCLELAB_MATRIX_HPP_
