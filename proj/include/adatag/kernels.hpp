#pragma once

#include <cstddef>
#include <span>

// Dense kernels behind the autodiff ops. Every kernel exists twice: a plain
// serial reference and an OpenMP version that splits the independent output
// index across threads. Each output element is reduced in the same order in
// both, so the two agree bitwise; tests/unit/test_kernels.cpp checks this and
// bench/bench_kernels.cpp times them against each other.
//
// All matrices are row-major. Shapes: A is m x n unless stated.
namespace adatag::kernels {

namespace serial {
// y = A x
void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y);
// y += A^T x   (x has m entries, y has n)
void gemv_t_acc(std::span<const double> a, std::size_t m, std::size_t n,
                std::span<const double> x, std::span<double> y);
// A += x y^T
void ger(std::span<double> a, std::size_t m, std::size_t n,
         std::span<const double> x, std::span<const double> y);
// C = A B,  A: m x k, B: k x n
void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n);
// dA += dC B^T   (dA: m x k)
void gemm_nt_acc(std::span<const double> dc, std::span<const double> b,
                 std::span<double> da, std::size_t m, std::size_t k,
                 std::size_t n);
// dB += A^T dC   (dB: k x n)
void gemm_tn_acc(std::span<const double> a, std::span<const double> dc,
                 std::span<double> db, std::size_t m, std::size_t k,
                 std::size_t n);
}  // namespace serial

namespace omp {
// Below this many multiply-adds the kernels run on the calling thread.
inline constexpr std::size_t kDefaultMinWork = 1 << 15;

void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y,
          std::size_t min_work = kDefaultMinWork);
void gemv_t_acc(std::span<const double> a, std::size_t m, std::size_t n,
                std::span<const double> x, std::span<double> y,
                std::size_t min_work = kDefaultMinWork);
void ger(std::span<double> a, std::size_t m, std::size_t n,
         std::span<const double> x, std::span<const double> y,
         std::size_t min_work = kDefaultMinWork);
void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          std::size_t min_work = kDefaultMinWork);
void gemm_nt_acc(std::span<const double> dc, std::span<const double> b,
                 std::span<double> da, std::size_t m, std::size_t k,
                 std::size_t n, std::size_t min_work = kDefaultMinWork);
void gemm_tn_acc(std::span<const double> a, std::span<const double> dc,
                 std::span<double> db, std::size_t m, std::size_t k,
                 std::size_t n, std::size_t min_work = kDefaultMinWork);
}  // namespace omp

// Entry points used by the library.
using omp::gemm;
using omp::gemm_nt_acc;
using omp::gemm_tn_acc;
using omp::gemv;
using omp::gemv_t_acc;
using omp::ger;

}  // namespace adatag::kernels
