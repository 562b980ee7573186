#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "modgcn/dense.hpp"
#include "modgcn/kernels.hpp"

namespace modgcn {

using Index = kernels::Index;

// Compressed-sparse-row matrix in canonical form: column indices strictly
// increasing within each row and no explicitly stored zeros.
class CsrMatrix {
 public:
  struct Triplet {
    Index row;
    Index col;
    double value;
  };

  CsrMatrix() = default;
  // Validates the canonical-form invariants; throws std::invalid_argument.
  CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
            std::vector<Index> col_indices, std::vector<double> values);

  // Duplicate coordinates are summed; entries that end up exactly zero are dropped.
  static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<Triplet> triplets);
  static CsrMatrix from_dense(const Dense2D& m);
  static CsrMatrix identity(std::size_t n);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t row_nnz(std::size_t i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
  std::span<const Index> row_cols(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_nnz(i)};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_nnz(i)};
  }

  // Stored value at (i, j), or 0. O(log row_nnz).
  double at(std::size_t i, std::size_t j) const;

  Dense2D to_dense() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

Dense2D spmm(const CsrMatrix& s, const Dense2D& b);    // S * B
Dense2D spmm_t(const CsrMatrix& s, const Dense2D& b);  // S^T * B
CsrMatrix transpose(const CsrMatrix& s);
// Sparse-sparse product (row-wise Gustavson with a dense accumulator).
CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);
// alpha * A + beta * B; exact zeros produced by cancellation are dropped.
CsrMatrix linear_combination(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b);
// Exact entrywise symmetry.
bool is_symmetric(const CsrMatrix& s);

}  // namespace modgcn
