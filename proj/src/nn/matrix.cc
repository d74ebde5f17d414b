#include "lcp/nn/matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcp/errors.h"

namespace lcp::nn {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void prepare(Matrix& out, std::size_t rows, std::size_t cols, bool accumulate,
             const char* op) {
  if (accumulate) {
    if (out.rows() != rows || out.cols() != cols) {
      throw DimensionError(std::string(op) + ": accumulator is " + shape(out) +
                           ", expected " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
    return;
  }
  if (out.rows() == rows && out.cols() == cols) {
    out.fill(0.0);
  } else {
    out = Matrix(rows, cols);
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix: " + std::to_string(data_.size()) +
                         " values for a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Matrix::squared_norm() const {
  double sum = 0.0;
  for (double v : data_) sum += v * v;
  return sum;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape(a) + " * " + shape(b));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  prepare(out, m, n, accumulate, "matmul");
  for (std::size_t i = 0; i < m; ++i) {
    double* out_row = out.data() + i * n;
    const double* a_row = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double scale = a_row[p];
      const double* b_row = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += scale * b_row[j];
    }
  }
}

void matmul_bt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_bt: " + shape(a) + " * (" + shape(b) + ")^T");
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  prepare(out, m, n, accumulate, "matmul_bt");
  for (std::size_t i = 0; i < m; ++i) {
    const double* a_row = a.data() + i * k;
    double* out_row = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* b_row = b.data() + j * k;
      // Four independent partial sums so the loop pipelines.
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        s0 += a_row[p] * b_row[p];
        s1 += a_row[p + 1] * b_row[p + 1];
        s2 += a_row[p + 2] * b_row[p + 2];
        s3 += a_row[p + 3] * b_row[p + 3];
      }
      for (; p < k; ++p) s0 += a_row[p] * b_row[p];
      out_row[j] += (s0 + s1) + (s2 + s3);
    }
  }
}

void matmul_at(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_at: (" + shape(a) + ")^T * " + shape(b));
  }
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  prepare(out, m, n, accumulate, "matmul_at");
  for (std::size_t p = 0; p < k; ++p) {
    const double* a_row = a.data() + p * m;
    const double* b_row = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double scale = a_row[i];
      double* out_row = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += scale * b_row[j];
    }
  }
}

void add_column(Matrix& m, const Matrix& bias) {
  if (bias.rows() != m.rows() || bias.cols() != 1) {
    throw DimensionError("add_column: bias " + shape(bias) + " for " + shape(m));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double b = bias(r, 0);
    for (double& v : m.row(r)) v += b;
  }
}

void accumulate_row_sums(const Matrix& m, Matrix& out) {
  if (out.rows() != m.rows() || out.cols() != 1) {
    throw DimensionError("row sums: output " + shape(out) + " for " + shape(m));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) sum += v;
    out(r, 0) += sum;
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": " + shape(a) + " vs " +
                         shape(b));
  }
}

}  // namespace lcp::nn
