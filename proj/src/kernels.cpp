#include "fragsim/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#if defined(__x86_64__) && defined(__GNUC__)
#define FRAGSIM_X86_LANES 1
#include <immintrin.h>
#else
#define FRAGSIM_X86_LANES 0
#endif

namespace fragsim::kernels {

namespace {

// ---- scalar reference lane -------------------------------------------------

double weighted_abs_sum_scalar(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::fabs(x[i]);
  return acc;
}

double weighted_sum_scalar(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
  return acc;
}

double index_moment_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(i + 1) * x[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

#if FRAGSIM_X86_LANES

// ---- AVX2/FMA lane ----------------------------------------------------------
// 4-wide main loop, scalar residual tail.  Horizontal reduction uses a fixed
// pairwise order so results are deterministic for a given lane.

__attribute__((target("avx2,fma"))) double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d pair = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swap));
}

__attribute__((target("avx2,fma"))) double weighted_abs_sum_avx2(const double* w, const double* x,
                                                                 std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), xv, acc);
  }
  double tail = hsum(acc);
  for (; i < n; ++i) tail += w[i] * std::fabs(x[i]);
  return tail;
}

__attribute__((target("avx2,fma"))) double weighted_sum_avx2(const double* w, const double* x,
                                                             std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i), acc);
  double tail = hsum(acc);
  for (; i < n; ++i) tail += w[i] * x[i];
  return tail;
}

__attribute__((target("avx2,fma"))) double index_moment_avx2(const double* x, std::size_t n) {
  __m256d idx = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);
  const __m256d four = _mm256_set1_pd(4.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(idx, _mm256_loadu_pd(x + i), acc);
    idx = _mm256_add_pd(idx, four);
  }
  double tail = hsum(acc);
  for (; i < n; ++i) tail += static_cast<double>(i + 1) * x[i];
  return tail;
}

__attribute__((target("avx2,fma"))) void axpy_avx2(double a, const double* x, double* y,
                                                   std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

bool avx2_available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

bool avx2_available() { return false; }

#endif  // FRAGSIM_X86_LANES

std::atomic<Lane> g_lane{avx2_available() ? Lane::avx2 : Lane::scalar};

void check_pair(std::span<const double> w, std::span<const double> x, const char* who) {
  if (w.size() < x.size()) throw std::invalid_argument(std::string(who) + ": weight too short");
}

}  // namespace

Lane active_lane() noexcept { return g_lane.load(std::memory_order_relaxed); }

bool lane_supported(Lane lane) noexcept {
  return lane == Lane::scalar || (lane == Lane::avx2 && avx2_available());
}

void force_lane(Lane lane) {
  if (!lane_supported(lane)) throw std::invalid_argument("force_lane: lane not supported on this host");
  g_lane.store(lane, std::memory_order_relaxed);
}

std::string_view lane_name(Lane lane) noexcept {
  return lane == Lane::avx2 ? "avx2" : "scalar";
}

double weighted_abs_sum(std::span<const double> w, std::span<const double> x) {
  check_pair(w, x, "weighted_abs_sum");
#if FRAGSIM_X86_LANES
  if (active_lane() == Lane::avx2) return weighted_abs_sum_avx2(w.data(), x.data(), x.size());
#endif
  return weighted_abs_sum_scalar(w.data(), x.data(), x.size());
}

double weighted_sum(std::span<const double> w, std::span<const double> x) {
  check_pair(w, x, "weighted_sum");
#if FRAGSIM_X86_LANES
  if (active_lane() == Lane::avx2) return weighted_sum_avx2(w.data(), x.data(), x.size());
#endif
  return weighted_sum_scalar(w.data(), x.data(), x.size());
}

double index_moment(std::span<const double> x) {
#if FRAGSIM_X86_LANES
  if (active_lane() == Lane::avx2) return index_moment_avx2(x.data(), x.size());
#endif
  return index_moment_scalar(x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (y.size() < x.size()) throw std::invalid_argument("axpy: destination too short");
#if FRAGSIM_X86_LANES
  if (active_lane() == Lane::avx2) {
    axpy_avx2(a, x.data(), y.data(), x.size());
    return;
  }
#endif
  axpy_scalar(a, x.data(), y.data(), x.size());
}

}  // namespace fragsim::kernels
