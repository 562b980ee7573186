#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace modgcn {

// Row-major dense matrix of doubles. Used for features, activations, weights
// and gradients.
class Dense2D {
 public:
  Dense2D() = default;
  Dense2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Dense2D(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Dense2D from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Dense2D identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);
  bool same_shape(const Dense2D& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_string() const;

  friend bool operator==(const Dense2D&, const Dense2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products. Shapes are checked; mismatches throw std::invalid_argument.
Dense2D matmul(const Dense2D& a, const Dense2D& b);     // a * b
Dense2D matmul_tn(const Dense2D& a, const Dense2D& b);  // a^T * b
Dense2D matmul_nt(const Dense2D& a, const Dense2D& b);  // a * b^T
Dense2D transpose(const Dense2D& a);

// y += scale * x
void add_scaled(Dense2D& y, const Dense2D& x, double scale = 1.0);
Dense2D scaled(const Dense2D& x, double scale);
Dense2D hadamard(const Dense2D& a, const Dense2D& b);

// Adds a 1 x cols bias row to every row of m.
void add_row_bias(Dense2D& m, const Dense2D& bias);
// 1 x cols vector of column sums.
Dense2D column_sums(const Dense2D& m);

// sum_ij a_ij * b_ij, i.e. tr(a^T b).
double frobenius_dot(const Dense2D& a, const Dense2D& b);
double frobenius_norm(const Dense2D& a);
double max_abs_diff(const Dense2D& a, const Dense2D& b);
bool all_finite(const Dense2D& m);

// Index of the largest entry in row i; ties go to the lowest column.
std::size_t argmax_row(const Dense2D& m, std::size_t i);

void require_same_shape(const Dense2D& a, const Dense2D& b, const char* what);

}  // namespace modgcn
