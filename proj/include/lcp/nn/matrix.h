#ifndef LCP_NN_MATRIX_H_
#define LCP_NN_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lcp::nn {

// Dense row-major matrix of doubles. Activations are laid out one column per
// batch item (features x batch), so y = W x + b maps directly onto matmul.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Throws DimensionError if values.size() != rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::size_t rows, std::size_t cols,
         std::initializer_list<double> values)
      : Matrix(rows, cols, std::vector<double>(values)) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  void fill(double value);
  bool all_finite() const;
  double squared_norm() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a * b.  a: m x k, b: k x n, out resized to m x n unless accumulating.
void matmul(const Matrix& a, const Matrix& b, Matrix& out,
            bool accumulate = false);
// out = a * b^T.  a: m x k, b: n x k.
void matmul_bt(const Matrix& a, const Matrix& b, Matrix& out,
               bool accumulate = false);
// out = a^T * b.  a: k x m, b: k x n.
void matmul_at(const Matrix& a, const Matrix& b, Matrix& out,
               bool accumulate = false);

// Adds column vector bias (rows x 1) to every column of m.
void add_column(Matrix& m, const Matrix& bias);
// Accumulates the row sums of m into out (rows x 1).
void accumulate_row_sums(const Matrix& m, Matrix& out);
// Throws DimensionError naming `what` unless a and b have equal shapes.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace lcp::nn

#endif  // LCP_NN_MATRIX_H_
