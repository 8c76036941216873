#include "phidro/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PHIDRO_X86 1
#include <immintrin.h>
#endif

#include <cassert>
#include <cmath>

namespace phidro::kernels::avx2 {

#ifdef PHIDRO_X86

bool available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, sh));
}

// Vector e^x via the Cephes rational approximation (~1 ulp on [-708, 708]).
// Arguments outside that range saturate to 0 / +inf.
inline __m256d exp_pd(__m256d x) {
  const __m256d kLog2E = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d kC1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000005e0);
  const __m256d kHi = _mm256_set1_pd(708.0);
  const __m256d kLo = _mm256_set1_pd(-708.0);

  __m256d over = _mm256_cmp_pd(x, kHi, _CMP_GT_OQ);
  __m256d under = _mm256_cmp_pd(x, kLo, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, kLo), kHi);

  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, kLog2E),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kC1, xc);
  r = _mm256_fnmadd_pd(n, kC2, r);

  __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(kP0, rr, kP1);
  p = _mm256_fmadd_pd(p, rr, kP2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(kQ0, rr, kQ1);
  q = _mm256_fmadd_pd(q, rr, kQ2);
  q = _mm256_fmadd_pd(q, rr, kQ3);
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent bits; |n| <= 1022 after the clamp
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i nl = _mm256_cvtepi32_epi64(ni);
  nl = _mm256_add_epi64(nl, _mm256_set1_epi64x(1023));
  nl = _mm256_slli_epi64(nl, 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(nl));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(HUGE_VAL), over);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), under);
  return e;
}

}  // namespace

double reduce_max(std::span<const double> v) {
  assert(!v.empty());
  std::size_t n = v.size(), i = 0;
  double m = v[0];
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(v.data());
    for (i = 4; i + 4 <= n; i += 4)
      acc = _mm256_max_pd(acc, _mm256_loadu_pd(v.data() + i));
    m = hmax(acc);
  }
  for (; i < n; ++i)
    if (v[i] > m) m = v[i];
  return m;
}

double reduce_min(std::span<const double> v) {
  assert(!v.empty());
  std::size_t n = v.size(), i = 0;
  double m = v[0];
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(v.data());
    for (i = 4; i + 4 <= n; i += 4)
      acc = _mm256_min_pd(acc, _mm256_loadu_pd(v.data() + i));
    m = hmin(acc);
  }
  for (; i < n; ++i)
    if (v[i] < m) m = v[i];
  return m;
}

double reduce_sum(std::span<const double> v) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t n = v.size(), i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(v.data() + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += v[i];
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  __m256d acc = _mm256_setzero_pd();
  std::size_t n = a.size(), i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i),
                          _mm256_loadu_pd(b.data() + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  __m256d va = _mm256_set1_pd(a);
  std::size_t n = x.size(), i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy);
    _mm256_storeu_pd(y.data() + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double exp_scaled_sum(std::span<const double> v, double shift, double scale) {
  __m256d vs = _mm256_set1_pd(shift);
  __m256d vc = _mm256_set1_pd(scale);
  __m256d acc = _mm256_setzero_pd();
  std::size_t n = v.size(), i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(v.data() + i), vs), vc);
    acc = _mm256_add_pd(acc, exp_pd(x));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::exp((v[i] - shift) * scale);
  return s;
}

double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out) {
  assert(v.size() == out.size());
  __m256d vs = _mm256_set1_pd(shift);
  __m256d vc = _mm256_set1_pd(scale);
  __m256d acc = _mm256_setzero_pd();
  std::size_t n = v.size(), i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(v.data() + i), vs), vc);
    __m256d e = exp_pd(x);
    _mm256_storeu_pd(out.data() + i, e);
    acc = _mm256_add_pd(acc, e);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    out[i] = std::exp((v[i] - shift) * scale);
    s += out[i];
  }
  return s;
}

double sum_pos(std::span<const double> v, double mu) {
  __m256d vm = _mm256_set1_pd(mu);
  __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  std::size_t n = v.size(), i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_sub_pd(_mm256_loadu_pd(v.data() + i), vm);
    acc = _mm256_add_pd(acc, _mm256_max_pd(t, zero));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double t = v[i] - mu;
    if (t > 0.0) s += t;
  }
  return s;
}

double sum_pos_sq(std::span<const double> v, double mu) {
  __m256d vm = _mm256_set1_pd(mu);
  __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  std::size_t n = v.size(), i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_max_pd(_mm256_sub_pd(_mm256_loadu_pd(v.data() + i), vm), zero);
    acc = _mm256_fmadd_pd(t, t, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double t = v[i] - mu;
    if (t > 0.0) s += t * t;
  }
  return s;
}

void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  assert(m.size() == rows * cols);
  assert(x.size() == cols && y.size() == rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c),
                            _mm256_loadu_pd(x.data() + c), acc);
    double s = hsum(acc);
    for (; c < cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

void softplus(std::span<const double> v, std::span<double> out) {
  assert(v.size() == out.size());
  // log(1+e^x) = max(x,0) + log1p(e^{-|x|}); the log1p stays scalar, only
  // the exp is vectorized.
  std::size_t n = v.size(), i = 0;
  __m256d zero = _mm256_setzero_pd();
  alignas(32) double ebuf[4];
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(v.data() + i);
    __m256d nax = _mm256_min_pd(x, _mm256_sub_pd(zero, x));  // -|x|
    _mm256_store_pd(ebuf, exp_pd(nax));
    for (int k = 0; k < 4; ++k) {
      double xv = v[i + k];
      out[i + k] = (xv > 0.0 ? xv : 0.0) + std::log1p(ebuf[k]);
    }
  }
  for (; i < n; ++i) {
    double x = v[i];
    out[i] = (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
  }
}

void sigmoid(std::span<const double> v, std::span<double> out) {
  assert(v.size() == out.size());
  std::size_t n = v.size(), i = 0;
  __m256d one = _mm256_set1_pd(1.0);
  __m256d zero = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(v.data() + i);
    __m256d e = exp_pd(_mm256_sub_pd(zero, x));
    _mm256_storeu_pd(out.data() + i, _mm256_div_pd(one, _mm256_add_pd(one, e)));
  }
  for (; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
}

#else  // !PHIDRO_X86

bool available() { return false; }

// Non-x86 builds fall back to the scalar kernels; these definitions only
// keep the linker happy and must never be reached.
double reduce_max(std::span<const double> v) { return scalar::reduce_max(v); }
double reduce_min(std::span<const double> v) { return scalar::reduce_min(v); }
double reduce_sum(std::span<const double> v) { return scalar::reduce_sum(v); }
double dot(std::span<const double> a, std::span<const double> b) {
  return scalar::dot(a, b);
}
void axpy(double a, std::span<const double> x, std::span<double> y) {
  scalar::axpy(a, x, y);
}
double exp_scaled_sum(std::span<const double> v, double shift, double scale) {
  return scalar::exp_scaled_sum(v, shift, scale);
}
double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out) {
  return scalar::exp_scaled(v, shift, scale, out);
}
double sum_pos(std::span<const double> v, double mu) {
  return scalar::sum_pos(v, mu);
}
double sum_pos_sq(std::span<const double> v, double mu) {
  return scalar::sum_pos_sq(v, mu);
}
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  scalar::matvec(m, rows, cols, x, y);
}
void softplus(std::span<const double> v, std::span<double> out) {
  scalar::softplus(v, out);
}
void sigmoid(std::span<const double> v, std::span<double> out) {
  scalar::sigmoid(v, out);
}

#endif

}  // namespace phidro::kernels::avx2
