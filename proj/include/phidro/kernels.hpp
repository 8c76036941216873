#pragma once

// Data-parallel arithmetic kernels used by the solvers.
//
// Every kernel has a scalar reference implementation (kernels::scalar) and,
// on x86-64 with AVX2+FMA, a vectorized variant (kernels::avx2). The public
// entry points dispatch through function pointers resolved once at startup;
// the selected backend can be overridden with force_backend(), which the
// equivalence tests use to compare both paths on the same inputs.

#include <cstddef>
#include <span>
#include <string>

namespace phidro::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
void force_backend(Backend b);
// Re-detects the best backend for this machine.
void reset_backend();
std::string backend_name();

// max_i v[i]; v must be nonempty.
double reduce_max(std::span<const double> v);
double reduce_min(std::span<const double> v);
double reduce_sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// sum_i exp((v[i] - shift) * scale)
double exp_scaled_sum(std::span<const double> v, double shift, double scale);
// out[i] = exp((v[i] - shift) * scale); returns the sum of out.
double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out);

// sum_i (v[i] - mu)_+ and sum_i (v[i] - mu)_+^2
double sum_pos(std::span<const double> v, double mu);
double sum_pos_sq(std::span<const double> v, double mu);

// y = M x for row-major M (rows x cols). y must not alias M or x.
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

// out[i] = log(1 + exp(v[i])), computed without overflow for large v.
void softplus(std::span<const double> v, std::span<double> out);
// out[i] = 1 / (1 + exp(-v[i]))
void sigmoid(std::span<const double> v, std::span<double> out);

namespace scalar {
double reduce_max(std::span<const double> v);
double reduce_min(std::span<const double> v);
double reduce_sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
double exp_scaled_sum(std::span<const double> v, double shift, double scale);
double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out);
double sum_pos(std::span<const double> v, double mu);
double sum_pos_sq(std::span<const double> v, double mu);
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
void softplus(std::span<const double> v, std::span<double> out);
void sigmoid(std::span<const double> v, std::span<double> out);
}  // namespace scalar

namespace avx2 {
// False when the binary was built without x86 support or the CPU lacks
// AVX2/FMA; all other avx2:: functions must not be called in that case.
bool available();
double reduce_max(std::span<const double> v);
double reduce_min(std::span<const double> v);
double reduce_sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
double exp_scaled_sum(std::span<const double> v, double shift, double scale);
double exp_scaled(std::span<const double> v, double shift, double scale,
                  std::span<double> out);
double sum_pos(std::span<const double> v, double mu);
double sum_pos_sq(std::span<const double> v, double mu);
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
void softplus(std::span<const double> v, std::span<double> out);
void sigmoid(std::span<const double> v, std::span<double> out);
}  // namespace avx2

// Stable helpers built on the dispatched kernels.

// eta * log( (1/n) sum_i exp(v[i]/eta) ), evaluated with max-subtraction.
double log_mean_exp(std::span<const double> v, double eta);
// gamma[i] = exp(v[i]/eta) / sum_j exp(v[j]/eta), with max-subtraction.
void softmax_weights(std::span<const double> v, double eta,
                     std::span<double> gamma);

}  // namespace phidro::kernels
