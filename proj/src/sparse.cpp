#include "modgcn/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace modgcn {

CsrMatrix::CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                     std::vector<Index> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
    throw std::invalid_argument("CsrMatrix: inconsistent offsets/indices/values lengths");
  }
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      throw std::invalid_argument("CsrMatrix: row_offsets decrease at row " + std::to_string(i));
    }
    for (std::size_t e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
      if (col_indices_[e] >= n_cols_) {
        throw std::invalid_argument("CsrMatrix: column index out of range in row " +
                                    std::to_string(i));
      }
      if (e > row_offsets_[i] && col_indices_[e] <= col_indices_[e - 1]) {
        throw std::invalid_argument("CsrMatrix: columns not strictly increasing in row " +
                                    std::to_string(i));
      }
      if (values_[e] == 0.0) {
        throw std::invalid_argument("CsrMatrix: explicit zero stored in row " + std::to_string(i));
      }
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw std::invalid_argument("CsrMatrix::from_triplets: coordinate (" +
                                  std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") outside " + std::to_string(n_rows) + "x" +
                                  std::to_string(n_cols));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(n_rows + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size();) {
    const Index r = triplets[t].row;
    const Index c = triplets[t].col;
    double sum = 0.0;
    for (; t < triplets.size() && triplets[t].row == r && triplets[t].col == c; ++t) {
      sum += triplets[t].value;
    }
    if (sum == 0.0) continue;
    cols.push_back(c);
    vals.push_back(sum);
    ++offsets[r + 1];
  }
  for (std::size_t i = 0; i < n_rows; ++i) offsets[i + 1] += offsets[i];
  return CsrMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::from_dense(const Dense2D& m) {
  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        cols.push_back(static_cast<Index>(j));
        vals.push_back(m(i, j));
      }
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<Index> cols(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<Index>(i);
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(j));
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
}

Dense2D CsrMatrix::to_dense() const {
  Dense2D d(n_rows_, n_cols_);
  for (std::size_t i = 0; i < n_rows_; ++i)
    for (std::size_t e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e)
      d(i, col_indices_[e]) = values_[e];
  return d;
}

Dense2D spmm(const CsrMatrix& s, const Dense2D& b) {
  if (s.n_cols() != b.rows()) {
    throw std::invalid_argument("spmm: sparse " + std::to_string(s.n_rows()) + "x" +
                                std::to_string(s.n_cols()) + " times dense " + b.shape_string());
  }
  Dense2D c(s.n_rows(), b.cols());
  kernels::active().spmm(s.n_rows(), s.row_offsets().data(), s.col_indices().data(),
                         s.values().data(), b.cols(), b.data(), c.data());
  return c;
}

Dense2D spmm_t(const CsrMatrix& s, const Dense2D& b) {
  if (s.n_rows() != b.rows()) {
    throw std::invalid_argument("spmm_t: sparse^T " + std::to_string(s.n_cols()) + "x" +
                                std::to_string(s.n_rows()) + " times dense " + b.shape_string());
  }
  Dense2D c(s.n_cols(), b.cols());
  kernels::active().spmm_t(s.n_rows(), s.row_offsets().data(), s.col_indices().data(),
                           s.values().data(), b.cols(), b.data(), c.data());
  return c;
}

CsrMatrix transpose(const CsrMatrix& s) {
  std::vector<std::size_t> offsets(s.n_cols() + 1, 0);
  for (Index c : s.col_indices()) ++offsets[c + 1];
  for (std::size_t j = 0; j < s.n_cols(); ++j) offsets[j + 1] += offsets[j];
  std::vector<Index> cols(s.nnz());
  std::vector<double> vals(s.nnz());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < s.n_rows(); ++i) {
    const auto rc = s.row_cols(i);
    const auto rv = s.row_values(i);
    for (std::size_t e = 0; e < rc.size(); ++e) {
      const std::size_t dst = cursor[rc[e]]++;
      cols[dst] = static_cast<Index>(i);
      vals[dst] = rv[e];
    }
  }
  return CsrMatrix(s.n_cols(), s.n_rows(), std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.n_cols() != b.n_rows()) throw std::invalid_argument("spgemm: incompatible shapes");
  const std::size_t n = b.n_cols();
  std::vector<double> acc(n, 0.0);
  std::vector<char> occupied(n, 0);
  std::vector<Index> touched;
  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    touched.clear();
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    for (std::size_t e = 0; e < ac.size(); ++e) {
      const auto bc = b.row_cols(ac[e]);
      const auto bv = b.row_values(ac[e]);
      for (std::size_t f = 0; f < bc.size(); ++f) {
        if (!occupied[bc[f]]) {
          occupied[bc[f]] = 1;
          touched.push_back(bc[f]);
        }
        acc[bc[f]] += av[e] * bv[f];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      if (acc[j] != 0.0) {
        cols.push_back(j);
        vals.push_back(acc[j]);
      }
      acc[j] = 0.0;
      occupied[j] = 0;
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(a.n_rows(), n, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix linear_combination(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) {
    throw std::invalid_argument("linear_combination: shape mismatch");
  }
  std::vector<std::size_t> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  auto emit = [&](Index c, double v) {
    if (v != 0.0) {
      cols.push_back(c);
      vals.push_back(v);
    }
  };
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    const auto ac = a.row_cols(i), bc = b.row_cols(i);
    const auto av = a.row_values(i), bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        emit(ac[p], alpha * av[p]);
        ++p;
      } else if (p == ac.size() || bc[q] < ac[p]) {
        emit(bc[q], beta * bv[q]);
        ++q;
      } else {
        emit(ac[p], alpha * av[p] + beta * bv[q]);
        ++p;
        ++q;
      }
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(a.n_rows(), a.n_cols(), std::move(offsets), std::move(cols), std::move(vals));
}

bool is_symmetric(const CsrMatrix& s) {
  return s.n_rows() == s.n_cols() && transpose(s) == s;
}

}  // namespace modgcn
