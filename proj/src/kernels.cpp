#include "adatag/kernels.hpp"

#include <omp.h>

namespace adatag::kernels {

namespace {

bool go_parallel(std::size_t work, std::size_t min_work) {
  return work >= min_work && !omp_in_parallel() && omp_get_max_threads() > 1;
}

// Row-range bodies shared by the serial and threaded versions so both reduce
// every output element in the same order.
inline void gemv_rows(const double* a, std::size_t n, const double* x, double* y,
                      std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* ar = a + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += ar[j] * x[j];
    y[i] = s;
  }
}

inline void gemv_t_cols(const double* a, std::size_t m, std::size_t n,
                        const double* x, double* y, std::size_t c0,
                        std::size_t c1) {
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = x[i];
    const double* ar = a + i * n;
    for (std::size_t j = c0; j < c1; ++j) y[j] += ar[j] * xi;
  }
}

inline void ger_rows(double* a, std::size_t n, const double* x, const double* y,
                     std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double xi = x[i];
    double* ar = a + i * n;
    for (std::size_t j = 0; j < n; ++j) ar[j] += xi * y[j];
  }
}

inline void gemm_rows(const double* a, const double* b, double* c,
                      std::size_t k, std::size_t n, std::size_t r0,
                      std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* cr = c + i * n;
    for (std::size_t j = 0; j < n; ++j) cr[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* br = b + p * n;
      for (std::size_t j = 0; j < n; ++j) cr[j] += aip * br[j];
    }
  }
}

inline void gemm_nt_rows(const double* dc, const double* b, double* da,
                         std::size_t k, std::size_t n, std::size_t r0,
                         std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* dcr = dc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* br = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += dcr[j] * br[j];
      da[i * k + p] += s;
    }
  }
}

inline void gemm_tn_rows(const double* a, const double* dc, double* db,
                         std::size_t m, std::size_t k, std::size_t n,
                         std::size_t p0, std::size_t p1) {
  for (std::size_t p = p0; p < p1; ++p) {
    double* dbr = db + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double aip = a[i * k + p];
      const double* dcr = dc + i * n;
      for (std::size_t j = 0; j < n; ++j) dbr[j] += aip * dcr[j];
    }
  }
}

template <typename Body>
void split_range(std::size_t count, Body body) {
#pragma omp parallel
  {
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t chunk = (count + nt - 1) / nt;
    const std::size_t lo = t * chunk;
    const std::size_t hi = lo + chunk < count ? lo + chunk : count;
    if (lo < hi) body(lo, hi);
  }
}

}  // namespace

namespace serial {

void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y) {
  gemv_rows(a.data(), n, x.data(), y.data(), 0, m);
}

void gemv_t_acc(std::span<const double> a, std::size_t m, std::size_t n,
                std::span<const double> x, std::span<double> y) {
  gemv_t_cols(a.data(), m, n, x.data(), y.data(), 0, n);
}

void ger(std::span<double> a, std::size_t m, std::size_t n,
         std::span<const double> x, std::span<const double> y) {
  ger_rows(a.data(), n, x.data(), y.data(), 0, m);
}

void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n) {
  gemm_rows(a.data(), b.data(), c.data(), k, n, 0, m);
}

void gemm_nt_acc(std::span<const double> dc, std::span<const double> b,
                 std::span<double> da, std::size_t m, std::size_t k,
                 std::size_t n) {
  gemm_nt_rows(dc.data(), b.data(), da.data(), k, n, 0, m);
}

void gemm_tn_acc(std::span<const double> a, std::span<const double> dc,
                 std::span<double> db, std::size_t m, std::size_t k,
                 std::size_t n) {
  gemm_tn_rows(a.data(), dc.data(), db.data(), m, k, n, 0, k);
}

}  // namespace serial

namespace omp {

void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y,
          std::size_t min_work) {
  if (!go_parallel(m * n, min_work)) return serial::gemv(a, m, n, x, y);
  split_range(m, [&](std::size_t lo, std::size_t hi) {
    gemv_rows(a.data(), n, x.data(), y.data(), lo, hi);
  });
}

void gemv_t_acc(std::span<const double> a, std::size_t m, std::size_t n,
                std::span<const double> x, std::span<double> y,
                std::size_t min_work) {
  if (!go_parallel(m * n, min_work)) return serial::gemv_t_acc(a, m, n, x, y);
  split_range(n, [&](std::size_t lo, std::size_t hi) {
    gemv_t_cols(a.data(), m, n, x.data(), y.data(), lo, hi);
  });
}

void ger(std::span<double> a, std::size_t m, std::size_t n,
         std::span<const double> x, std::span<const double> y,
         std::size_t min_work) {
  if (!go_parallel(m * n, min_work)) return serial::ger(a, m, n, x, y);
  split_range(m, [&](std::size_t lo, std::size_t hi) {
    ger_rows(a.data(), n, x.data(), y.data(), lo, hi);
  });
}

void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          std::size_t min_work) {
  if (!go_parallel(m * k * n, min_work)) return serial::gemm(a, b, c, m, k, n);
  split_range(m, [&](std::size_t lo, std::size_t hi) {
    gemm_rows(a.data(), b.data(), c.data(), k, n, lo, hi);
  });
}

void gemm_nt_acc(std::span<const double> dc, std::span<const double> b,
                 std::span<double> da, std::size_t m, std::size_t k,
                 std::size_t n, std::size_t min_work) {
  if (!go_parallel(m * k * n, min_work)) {
    return serial::gemm_nt_acc(dc, b, da, m, k, n);
  }
  split_range(m, [&](std::size_t lo, std::size_t hi) {
    gemm_nt_rows(dc.data(), b.data(), da.data(), k, n, lo, hi);
  });
}

void gemm_tn_acc(std::span<const double> a, std::span<const double> dc,
                 std::span<double> db, std::size_t m, std::size_t k,
                 std::size_t n, std::size_t min_work) {
  if (!go_parallel(m * k * n, min_work)) {
    return serial::gemm_tn_acc(a, dc, db, m, k, n);
  }
  split_range(k, [&](std::size_t lo, std::size_t hi) {
    gemm_tn_rows(a.data(), dc.data(), db.data(), m, k, n, lo, hi);
  });
}

}  // namespace omp

}  // namespace adatag::kernels
