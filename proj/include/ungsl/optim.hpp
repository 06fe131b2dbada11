#ifndef UNGSL_OPTIM_HPP
#define UNGSL_OPTIM_HPP

#include <cmath>
#include <string>
#include <vector>

#include "ungsl/dense.hpp"

namespace ungsl {

/// A named value/gradient pair. lr_scale lets one parameter (the
/// reweighting thresholds) train at its own learning rate inside a shared
/// optimizer.
struct ParamTensor {
  DenseMatrix value;
  DenseMatrix grad;
  std::string name;
  double lr_scale = 1.0;

  ParamTensor() = default;
  ParamTensor(std::size_t rows, std::size_t cols, std::string name_)
      : value(rows, cols), grad(rows, cols), name(std::move(name_)) {}

  void zero_grad() { grad.fill(0.0); }
};

struct AdamState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::size_t t = 0;
  std::vector<DenseMatrix> m, v;
};

/// One Adam update with bias correction over a fixed parameter list. The
/// list must be identical (size and shapes) on every call with the same
/// state. Weight decay is plain L2 added to the gradient. A non-finite
/// gradient aborts the step and names the offending parameter.
inline void adam_step(std::vector<ParamTensor*>& params, AdamState& state) {
  if (state.m.empty()) {
    for (ParamTensor* p : params) {
      state.m.emplace_back(p->value.rows(), p->value.cols());
      state.v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  require(state.m.size() == params.size(), "adam_step: parameter list changed");
  for (ParamTensor* p : params)
    if (!p->grad.all_finite()) fail("adam_step: non-finite gradient in " + p->name);

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    ParamTensor& p = *params[pi];
    require(state.m[pi].same_shape(p.value), "adam_step: shape changed for " + p.name);
    const double lr = state.lr * p.lr_scale;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double g = p.grad.data()[i] + state.weight_decay * p.value.data()[i];
      double& m = state.m[pi].data()[i];
      double& v = state.v[pi].data()[i];
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p.value.data()[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace ungsl

#endif  // UNGSL_OPTIM_HPP
