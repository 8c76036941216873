#include "phidro/model.hpp"

#include <cassert>
#include <cmath>

#include "phidro/errors.hpp"
#include "phidro/kernels.hpp"
#include "phidro/rng.hpp"

namespace phidro {

namespace {

// log(1 + e^{-m}) without overflow
inline double logistic_loss(double margin) {
  return margin > 0.0 ? std::log1p(std::exp(-margin))
                      : -margin + std::log1p(std::exp(margin));
}

// d/dm log(1+e^{-m}) = -sigmoid(-m)
inline double logistic_loss_dmargin(double margin) {
  return margin > 0.0 ? -std::exp(-margin) / (1.0 + std::exp(-margin))
                      : -1.0 / (1.0 + std::exp(margin));
}

// theta = [w (d), b]; score = w.x + b; loss = 0.5 (score - y)^2
class LinearModel final : public Model {
 public:
  explicit LinearModel(int d) : d_(d) {}
  int param_dim() const override { return d_ + 1; }
  int input_dim() const override { return d_; }
  std::string name() const override { return "linear"; }

  double score(std::span<const double> theta, const DataPoint& z) const override {
    return kernels::dot(theta.first(d_), z.x) + theta[d_];
  }
  double loss(std::span<const double> theta, const DataPoint& z) const override {
    double r = score(theta, z) - z.y;
    return 0.5 * r * r;
  }
  double loss_grad_theta(std::span<const double> theta, const DataPoint& z,
                         std::span<double> grad) const override {
    double r = score(theta, z) - z.y;
    for (int i = 0; i < d_; ++i) grad[i] = r * z.x[i];
    grad[d_] = r;
    return 0.5 * r * r;
  }
  void loss_grad_input(std::span<const double> theta, const DataPoint& z,
                       std::span<double> gx) const override {
    double r = score(theta, z) - z.y;
    for (int i = 0; i < d_; ++i) gx[i] = r * theta[i];
  }

 private:
  int d_;
};

// theta = [w (d), b]; loss = log(1 + exp(-y (w.x + b))), y in {-1, +1}
class LogisticModel final : public Model {
 public:
  explicit LogisticModel(int d) : d_(d) {}
  int param_dim() const override { return d_ + 1; }
  int input_dim() const override { return d_; }
  std::string name() const override { return "logistic"; }

  double score(std::span<const double> theta, const DataPoint& z) const override {
    return kernels::dot(theta.first(d_), z.x) + theta[d_];
  }
  double loss(std::span<const double> theta, const DataPoint& z) const override {
    return logistic_loss(z.y * score(theta, z));
  }
  double loss_grad_theta(std::span<const double> theta, const DataPoint& z,
                         std::span<double> grad) const override {
    double m = z.y * score(theta, z);
    double g = logistic_loss_dmargin(m) * z.y;
    for (int i = 0; i < d_; ++i) grad[i] = g * z.x[i];
    grad[d_] = g;
    return logistic_loss(m);
  }
  void loss_grad_input(std::span<const double> theta, const DataPoint& z,
                       std::span<double> gx) const override {
    double m = z.y * score(theta, z);
    double g = logistic_loss_dmargin(m) * z.y;
    for (int i = 0; i < d_; ++i) gx[i] = g * theta[i];
  }

 private:
  int d_;
};

inline double elu(double v) { return v > 0.0 ? v : std::expm1(v); }
inline double elu_prime(double v) { return v > 0.0 ? 1.0 : std::exp(v); }

// One ELU hidden layer with a logistic head.
// theta = [W1 (h x d, row-major), b1 (h), w2 (h), b2]
class Mlp1Model final : public Model {
 public:
  Mlp1Model(int d, int h) : d_(d), h_(h) {}
  int param_dim() const override { return h_ * d_ + h_ + h_ + 1; }
  int input_dim() const override { return d_; }
  std::string name() const override { return "mlp1"; }

  double score(std::span<const double> theta, const DataPoint& z) const override {
    double s;
    forward(theta, z.x, nullptr, nullptr, &s);
    return s;
  }
  double loss(std::span<const double> theta, const DataPoint& z) const override {
    double s;
    forward(theta, z.x, nullptr, nullptr, &s);
    return logistic_loss(z.y * s);
  }
  double loss_grad_theta(std::span<const double> theta, const DataPoint& z,
                         std::span<double> grad) const override {
    std::vector<double> pre(h_), act(h_);
    double s;
    forward(theta, z.x, pre.data(), act.data(), &s);
    double m = z.y * s;
    double ds = logistic_loss_dmargin(m) * z.y;  // dloss/dscore
    auto [w1, b1, w2, b2] = unpack(theta);
    (void)b1;
    (void)b2;
    for (int j = 0; j < h_; ++j) {
      double dh = ds * w2[j] * elu_prime(pre[j]);
      for (int i = 0; i < d_; ++i) grad[j * d_ + i] = dh * z.x[i];
      grad[h_ * d_ + j] = dh;          // b1
      grad[h_ * d_ + h_ + j] = ds * act[j];  // w2
    }
    grad[h_ * d_ + 2 * h_] = ds;  // b2
    return logistic_loss(m);
  }
  void loss_grad_input(std::span<const double> theta, const DataPoint& z,
                       std::span<double> gx) const override {
    std::vector<double> pre(h_);
    double s;
    forward(theta, z.x, pre.data(), nullptr, &s);
    double ds = logistic_loss_dmargin(z.y * s) * z.y;
    auto [w1, b1, w2, b2] = unpack(theta);
    (void)b1;
    (void)b2;
    for (int i = 0; i < d_; ++i) gx[i] = 0.0;
    for (int j = 0; j < h_; ++j) {
      double dh = ds * w2[j] * elu_prime(pre[j]);
      for (int i = 0; i < d_; ++i) gx[i] += dh * w1[j * d_ + i];
    }
  }

 private:
  struct Parts {
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;
  };
  Parts unpack(std::span<const double> theta) const {
    const double* p = theta.data();
    return {p, p + h_ * d_, p + h_ * d_ + h_, p + h_ * d_ + 2 * h_};
  }
  void forward(std::span<const double> theta, std::span<const double> x,
               double* pre, double* act, double* score) const {
    auto [w1, b1, w2, b2] = unpack(theta);
    double s = *b2;
    for (int j = 0; j < h_; ++j) {
      double v = b1[j];
      for (int i = 0; i < d_; ++i) v += w1[j * d_ + i] * x[i];
      double a = elu(v);
      if (pre) pre[j] = v;
      if (act) act[j] = a;
      s += w2[j] * a;
    }
    *score = s;
  }

  int d_;
  int h_;
};

}  // namespace

std::unique_ptr<Model> make_model(ModelKind kind, int input_dim, int hidden) {
  if (input_dim < 1) throw ParameterError("model needs input_dim >= 1");
  switch (kind) {
    case ModelKind::Linear:
      return std::make_unique<LinearModel>(input_dim);
    case ModelKind::Logistic:
      return std::make_unique<LogisticModel>(input_dim);
    case ModelKind::Mlp1:
      if (hidden < 1) throw ParameterError("mlp1 needs hidden >= 1");
      return std::make_unique<Mlp1Model>(input_dim, hidden);
  }
  throw ParameterError("unknown model kind");
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "linear") return ModelKind::Linear;
  if (text == "logistic") return ModelKind::Logistic;
  if (text == "mlp1") return ModelKind::Mlp1;
  throw ParameterError("unknown model '" + text +
                       "' (expected linear|logistic|mlp1)");
}

std::vector<double> initial_theta(const Model& model, std::uint64_t seed) {
  std::vector<double> theta(model.param_dim(), 0.0);
  if (model.name() == "mlp1") {
    Rng rng = Rng::stream(seed, 0);
    for (auto& t : theta) t = 0.1 * rng.next_gaussian();
  }
  return theta;
}

}  // namespace phidro
