#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "modgcn/kernels.hpp"
#include "modgcn/sparse.hpp"

using namespace modgcn;
using namespace modgcn::kernels;
using testing::random_dense;

namespace {

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::max(std::abs(a[i]), std::abs(b[i])));
  }
  return den == 0.0 ? num : num / den;
}

std::vector<const KernelTable*> backends() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (available(Backend::avx2)) out.push_back(avx2_table());
  return out;
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  Rng rng(1);
  const KernelTable& k = scalar_table();
  for (std::size_t m : {1, 3, 6}) {
    for (std::size_t n : {1, 4, 9}) {
      for (std::size_t inner : {1, 5, 8}) {
        const Dense2D a = random_dense(m, inner, rng, 0.3);
        const Dense2D b = random_dense(inner, n, rng);
        Dense2D c(m, n, 0.5);
        k.gemm_nn(m, n, inner, a.data(), b.data(), c.data());
        Dense2D expect = testing::naive_matmul(a, b);
        for (double& v : expect.values()) v += 0.5;
        CHECK(testing::max_abs_entry_diff(c, expect) < 1e-14);

        const Dense2D at = random_dense(inner, m, rng, 0.3);  // use as A[inner x m]
        Dense2D ctn(m, n);
        k.gemm_tn(inner, m, n, at.data(), b.data(), ctn.data());
        CHECK(testing::max_abs_entry_diff(ctn, testing::naive_matmul(transpose(at), b)) < 1e-14);

        const Dense2D bt = random_dense(n, inner, rng);
        Dense2D cnt(m, n);
        k.gemm_nt(m, n, inner, a.data(), bt.data(), cnt.data());
        CHECK(testing::max_abs_entry_diff(cnt, testing::naive_matmul(a, transpose(bt))) < 1e-14);
      }
    }
  }
}

TEST_CASE("axpy and dot agree across backends") {
  Rng rng(2);
  for (const std::size_t n : kSizes) {
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : y) v = rng.uniform(-1, 1);
    const double ref_dot = scalar_table().dot(n, x.data(), y.data());
    std::vector<double> ref_y = y;
    scalar_table().axpy(n, 0.7, x.data(), ref_y.data());
    for (const KernelTable* k : backends()) {
      CAPTURE(k->name);
      CAPTURE(n);
      CHECK(std::abs(k->dot(n, x.data(), y.data()) - ref_dot) <= 1e-12 * std::max(1.0, std::abs(ref_dot)));
      std::vector<double> yy = y;
      k->axpy(n, 0.7, x.data(), yy.data());
      CHECK(rel_diff(yy, ref_y) <= 1e-12);
    }
  }
}

TEST_CASE("gemm variants agree across backends to 1e-12") {
  Rng rng(3);
  for (const std::size_t m : {1, 5, 17}) {
    for (const std::size_t n : kSizes) {
      for (const std::size_t inner : {1, 4, 13}) {
        const Dense2D a = random_dense(m, inner, rng, 0.5);
        const Dense2D b = random_dense(inner, n, rng);
        const Dense2D bt = random_dense(n, inner, rng);
        const Dense2D g = random_dense(m, n, rng);
        Dense2D ref_nn(m, n, 0.25), ref_tn(inner, n), ref_nt(m, n);
        scalar_table().gemm_nn(m, n, inner, a.data(), b.data(), ref_nn.data());
        scalar_table().gemm_tn(m, inner, n, a.data(), g.data(), ref_tn.data());
        scalar_table().gemm_nt(m, n, inner, a.data(), bt.data(), ref_nt.data());
        for (const KernelTable* k : backends()) {
          CAPTURE(k->name);
          Dense2D c_nn(m, n, 0.25), c_tn(inner, n), c_nt(m, n);
          k->gemm_nn(m, n, inner, a.data(), b.data(), c_nn.data());
          k->gemm_tn(m, inner, n, a.data(), g.data(), c_tn.data());
          k->gemm_nt(m, n, inner, a.data(), bt.data(), c_nt.data());
          CHECK(rel_diff(c_nn.values(), ref_nn.values()) <= 1e-12);
          CHECK(rel_diff(c_tn.values(), ref_tn.values()) <= 1e-12);
          CHECK(rel_diff(c_nt.values(), ref_nt.values()) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("spmm and spmm_t agree across backends and with the dense product") {
  Rng rng(4);
  for (const std::size_t rows : {1, 6, 23}) {
    for (const std::size_t p : kSizes) {
      const Dense2D dense = random_dense(rows, rows + 2, rng, 0.7);
      const CsrMatrix s = CsrMatrix::from_dense(dense);
      const Dense2D b = random_dense(rows + 2, p, rng);
      const Dense2D bt = random_dense(rows, p, rng);
      const Dense2D expect = testing::naive_matmul(dense, b);
      const Dense2D expect_t = testing::naive_matmul(transpose(dense), bt);
      for (const KernelTable* k : backends()) {
        CAPTURE(k->name);
        Dense2D c(rows, p, 99.0);  // overwritten
        k->spmm(rows, s.row_offsets().data(), s.col_indices().data(), s.values().data(), p, b.data(), c.data());
        CHECK(testing::max_abs_entry_diff(c, expect) < 1e-13);
        Dense2D ct(rows + 2, p);
        k->spmm_t(rows, s.row_offsets().data(), s.col_indices().data(), s.values().data(), p, bt.data(), ct.data());
        CHECK(testing::max_abs_entry_diff(ct, expect_t) < 1e-13);
      }
    }
  }
}

TEST_CASE("kernels are deterministic for a fixed input") {
  Rng rng(5);
  const Dense2D a = random_dense(19, 11, rng, 0.2);
  const Dense2D b = random_dense(11, 13, rng);
  for (const KernelTable* k : backends()) {
    Dense2D c1(19, 13), c2(19, 13);
    k->gemm_nn(19, 13, 11, a.data(), b.data(), c1.data());
    k->gemm_nn(19, 13, 11, a.data(), b.data(), c2.data());
    CHECK(c1 == c2);
  }
}

TEST_CASE("backend selection") {
  CHECK(parse_backend("scalar") == Backend::scalar);
  CHECK(parse_backend("avx2") == Backend::avx2);
  CHECK_THROWS_AS(parse_backend("neon"), std::invalid_argument);
  CHECK(backend_name(Backend::scalar) == "scalar");
  const Backend before = current_backend();
  {
    ScopedBackend pin(Backend::scalar);
    CHECK(current_backend() == Backend::scalar);
    CHECK(&active() == &scalar_table());
  }
  CHECK(current_backend() == before);
  if (!available(Backend::avx2)) CHECK_THROWS_AS(set_backend(Backend::avx2), std::invalid_argument);
}

TEST_CASE("library routines agree across backends") {
  if (!available(Backend::avx2)) return;
  Rng rng(6);
  const Dense2D a = random_dense(37, 29, rng, 0.6);
  const Dense2D b = random_dense(29, 16, rng);
  const CsrMatrix s = CsrMatrix::from_dense(random_dense(37, 37, rng, 0.8));
  Dense2D scalar_mm, scalar_sp;
  {
    ScopedBackend pin(Backend::scalar);
    scalar_mm = matmul(a, b);
    scalar_sp = spmm(s, scalar_mm);
  }
  ScopedBackend pin(Backend::avx2);
  const Dense2D mm = matmul(a, b);
  CHECK(rel_diff(mm.values(), scalar_mm.values()) <= 1e-12);
  CHECK(rel_diff(spmm(s, mm).values(), scalar_sp.values()) <= 1e-12);
}
