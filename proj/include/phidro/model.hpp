#pragma once

// Differentiable losses f_theta(z) with hand-written parameter- and
// input-gradients. A data point is a feature vector plus a scalar label
// (class label in {-1, +1} for the classifiers, regression target for
// Linear, application-defined otherwise). Attacks perturb features only.

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace phidro {

struct DataPoint {
  std::vector<double> x;
  double y = 0.0;
};

using Dataset = std::vector<DataPoint>;

class Model {
 public:
  virtual ~Model() = default;
  virtual int param_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual std::string name() const = 0;

  virtual double loss(std::span<const double> theta,
                      const DataPoint& z) const = 0;
  // Returns the loss; accumulates nothing, writes the full gradient.
  virtual double loss_grad_theta(std::span<const double> theta,
                                 const DataPoint& z,
                                 std::span<double> grad) const = 0;
  virtual void loss_grad_input(std::span<const double> theta,
                               const DataPoint& z,
                               std::span<double> grad_x) const = 0;
  // Raw decision score; classification predicts sign(score).
  virtual double score(std::span<const double> theta,
                       const DataPoint& z) const = 0;
};

enum class ModelKind { Linear, Logistic, Mlp1 };

// hidden is used by Mlp1 only (ELU activation, logistic head).
std::unique_ptr<Model> make_model(ModelKind kind, int input_dim,
                                  int hidden = 16);
ModelKind parse_model_kind(const std::string& text);

// Deterministic initial parameter vector; Linear/Logistic start at zero,
// Mlp1 needs symmetry breaking and draws small Gaussians from the seed.
std::vector<double> initial_theta(const Model& model, std::uint64_t seed);

}  // namespace phidro
