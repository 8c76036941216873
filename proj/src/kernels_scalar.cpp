#include "phidro/kernels.hpp"

#include <cassert>
#include <cmath>

namespace phidro::kernels::scalar {

double reduce_max(std::span<const double> v) {
  assert(!v.empty());
  double m = v[0];
  for (double x : v)
    if (x > m) m = x;
  return m;
}

double reduce_min(std::span<const double> v) {
  assert(!v.empty());
  double m = v[0];
  for (double x : v)
    if (x < m) m = x;
  return m;
}

double reduce_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double exp_scaled_sum(std::span<const double> v, double shift, double scale) {
  double s = 0.0;
  for (double x : v) s += std::exp((x - shift) * scale);
  return s;
}

double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out) {
  assert(v.size() == out.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp((v[i] - shift) * scale);
    s += out[i];
  }
  return s;
}

double sum_pos(std::span<const double> v, double mu) {
  double s = 0.0;
  for (double x : v) {
    double t = x - mu;
    if (t > 0.0) s += t;
  }
  return s;
}

double sum_pos_sq(std::span<const double> v, double mu) {
  double s = 0.0;
  for (double x : v) {
    double t = x - mu;
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
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

void softplus(std::span<const double> v, std::span<double> out) {
  assert(v.size() == out.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = v[i];
    // log(1+e^x) = max(x,0) + log1p(e^{-|x|})
    out[i] = (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
  }
}

void sigmoid(std::span<const double> v, std::span<double> out) {
  assert(v.size() == out.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-v[i]));
}

}  // namespace phidro::kernels::scalar
