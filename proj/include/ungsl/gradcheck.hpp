#ifndef UNGSL_GRADCHECK_HPP
#define UNGSL_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "ungsl/optim.hpp"

namespace ungsl {

/// Central-difference check of analytic gradients.
///
/// `loss_fn` evaluates the scalar loss at the parameters' current values
/// and must be deterministic. Analytic gradients are taken from each
/// parameter's grad field, which the caller populates (one backward pass)
/// before the check. Returns the max over coordinates of
/// |analytic - numeric| / max(1e-6, |numeric|); the floor keeps the ratio
/// meaningful where the true gradient sits below the O(h^2) + roundoff
/// resolution of the central difference itself.
inline double finite_diff_check(const std::function<double()>& loss_fn,
                                std::vector<ParamTensor*> params,
                                double h = 1e-5) {
  double worst = 0.0;
  for (ParamTensor* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value.data()[i];
      p->value.data()[i] = orig + h;
      const double fp = loss_fn();
      p->value.data()[i] = orig - h;
      const double fm = loss_fn();
      p->value.data()[i] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        fail("finite_diff_check: non-finite loss at " + p->name);
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = p->grad.data()[i];
      const double rel = std::fabs(analytic - numeric) /
                         std::max(1e-6, std::fabs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace ungsl

#endif  // UNGSL_GRADCHECK_HPP
