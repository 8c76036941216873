#include "phidro/kernels.hpp"

#include <cassert>
#include <cmath>

namespace phidro::kernels {

namespace {

struct Table {
  double (*reduce_max)(std::span<const double>);
  double (*reduce_min)(std::span<const double>);
  double (*reduce_sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  double (*exp_scaled_sum)(std::span<const double>, double, double);
  double (*exp_scaled)(std::span<const double>, double, double, std::span<double>);
  double (*sum_pos)(std::span<const double>, double);
  double (*sum_pos_sq)(std::span<const double>, double);
  void (*matvec)(std::span<const double>, std::size_t, std::size_t,
                 std::span<const double>, std::span<double>);
  void (*softplus)(std::span<const double>, std::span<double>);
  void (*sigmoid)(std::span<const double>, std::span<double>);
};

constexpr Table kScalar = {
    scalar::reduce_max, scalar::reduce_min, scalar::reduce_sum, scalar::dot,
    scalar::axpy,       scalar::exp_scaled_sum, scalar::exp_scaled,
    scalar::sum_pos,    scalar::sum_pos_sq,     scalar::matvec,
    scalar::softplus,   scalar::sigmoid};

constexpr Table kAvx2 = {
    avx2::reduce_max, avx2::reduce_min, avx2::reduce_sum, avx2::dot,
    avx2::axpy,       avx2::exp_scaled_sum, avx2::exp_scaled,
    avx2::sum_pos,    avx2::sum_pos_sq,     avx2::matvec,
    avx2::softplus,   avx2::sigmoid};

Backend g_backend = avx2::available() ? Backend::Avx2 : Backend::Scalar;
const Table* g_table = avx2::available() ? &kAvx2 : &kScalar;

}  // namespace

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2::available()) b = Backend::Scalar;
  g_backend = b;
  g_table = (b == Backend::Avx2) ? &kAvx2 : &kScalar;
}

void reset_backend() {
  force_backend(avx2::available() ? Backend::Avx2 : Backend::Scalar);
}

std::string backend_name() {
  return g_backend == Backend::Avx2 ? "avx2" : "scalar";
}

double reduce_max(std::span<const double> v) { return g_table->reduce_max(v); }
double reduce_min(std::span<const double> v) { return g_table->reduce_min(v); }
double reduce_sum(std::span<const double> v) { return g_table->reduce_sum(v); }
double dot(std::span<const double> a, std::span<const double> b) {
  return g_table->dot(a, b);
}
void axpy(double a, std::span<const double> x, std::span<double> y) {
  g_table->axpy(a, x, y);
}
double exp_scaled_sum(std::span<const double> v, double shift, double scale) {
  return g_table->exp_scaled_sum(v, shift, scale);
}
double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out) {
  return g_table->exp_scaled(v, shift, scale, out);
}
double sum_pos(std::span<const double> v, double mu) {
  return g_table->sum_pos(v, mu);
}
double sum_pos_sq(std::span<const double> v, double mu) {
  return g_table->sum_pos_sq(v, mu);
}
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  g_table->matvec(m, rows, cols, x, y);
}
void softplus(std::span<const double> v, std::span<double> out) {
  g_table->softplus(v, out);
}
void sigmoid(std::span<const double> v, std::span<double> out) {
  g_table->sigmoid(v, out);
}

double log_mean_exp(std::span<const double> v, double eta) {
  assert(!v.empty() && eta > 0.0);
  double mx = reduce_max(v);
  double s = exp_scaled_sum(v, mx, 1.0 / eta);
  return mx + eta * std::log(s / static_cast<double>(v.size()));
}

void softmax_weights(std::span<const double> v, double eta,
                     std::span<double> gamma) {
  assert(v.size() == gamma.size() && eta > 0.0);
  double mx = reduce_max(v);
  double s = exp_scaled(v, mx, 1.0 / eta, gamma);
  double inv = 1.0 / s;
  for (double& g : gamma) g *= inv;
}

}  // namespace phidro::kernels
