#include "modgcn/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modgcn/kernels.hpp"

namespace modgcn {

Dense2D::Dense2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("Dense2D: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

Dense2D Dense2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Dense2D::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Dense2D(r, c, std::move(data));
}

Dense2D Dense2D::identity(std::size_t n) {
  Dense2D m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Dense2D::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Dense2D::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_same_shape(const Dense2D& a, const Dense2D& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_string() +
                                " vs " + b.shape_string());
  }
}

namespace {
void require_inner(std::size_t lhs, std::size_t rhs, const Dense2D& a, const Dense2D& b,
                   const char* what) {
  if (lhs != rhs) {
    throw std::invalid_argument(std::string(what) + ": incompatible shapes " + a.shape_string() +
                                " and " + b.shape_string());
  }
}
}  // namespace

Dense2D matmul(const Dense2D& a, const Dense2D& b) {
  require_inner(a.cols(), b.rows(), a, b, "matmul");
  Dense2D c(a.rows(), b.cols());
  kernels::active().gemm_nn(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
  return c;
}

Dense2D matmul_tn(const Dense2D& a, const Dense2D& b) {
  require_inner(a.rows(), b.rows(), a, b, "matmul_tn");
  Dense2D c(a.cols(), b.cols());
  kernels::active().gemm_tn(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

Dense2D matmul_nt(const Dense2D& a, const Dense2D& b) {
  require_inner(a.cols(), b.cols(), a, b, "matmul_nt");
  Dense2D c(a.rows(), b.rows());
  kernels::active().gemm_nt(a.rows(), b.rows(), a.cols(), a.data(), b.data(), c.data());
  return c;
}

Dense2D transpose(const Dense2D& a) {
  Dense2D t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void add_scaled(Dense2D& y, const Dense2D& x, double scale) {
  require_same_shape(y, x, "add_scaled");
  kernels::active().axpy(y.size(), scale, x.data(), y.data());
}

Dense2D scaled(const Dense2D& x, double scale) {
  Dense2D out = x;
  for (double& v : out.values()) v *= scale;
  return out;
}

Dense2D hadamard(const Dense2D& a, const Dense2D& b) {
  require_same_shape(a, b, "hadamard");
  Dense2D out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
  return out;
}

void add_row_bias(Dense2D& m, const Dense2D& bias) {
  if (bias.rows() != 1 || bias.cols() != m.cols()) {
    throw std::invalid_argument("add_row_bias: bias " + bias.shape_string() + " for matrix " +
                                m.shape_string());
  }
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < m.rows(); ++i) k.axpy(m.cols(), 1.0, bias.data(), m.row(i).data());
}

Dense2D column_sums(const Dense2D& m) {
  Dense2D s(1, m.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < m.rows(); ++i) k.axpy(m.cols(), 1.0, m.row(i).data(), s.data());
  return s;
}

double frobenius_dot(const Dense2D& a, const Dense2D& b) {
  require_same_shape(a, b, "frobenius_dot");
  return kernels::active().dot(a.size(), a.data(), b.data());
}

double frobenius_norm(const Dense2D& a) { return std::sqrt(frobenius_dot(a, a)); }

double max_abs_diff(const Dense2D& a, const Dense2D& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

bool all_finite(const Dense2D& m) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double v) { return std::isfinite(v); });
}

std::size_t argmax_row(const Dense2D& m, std::size_t i) {
  const auto r = m.row(i);
  std::size_t best = 0;
  for (std::size_t j = 1; j < r.size(); ++j)
    if (r[j] > r[best]) best = j;
  return best;
}

}  // namespace modgcn
