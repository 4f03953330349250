#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "redfwi/errors.hpp"
#include "redfwi/field.hpp"

namespace redfwi {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  long steps = 0;

  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    steps = 0;
  }
};

// One bias-corrected Adam update: theta -= lr * mhat / (sqrt(vhat) + eps).
inline void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
                      AdamState& st, double lr, const AdamParams& p = {}) {
  if (st.m.size() != theta.size()) throw ContractError("adam: state size mismatch");
  if (grad.size() != theta.size()) throw ContractError("adam: gradient size mismatch");
  ++st.steps;
  double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(st.steps));
  double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(st.steps));
  for (size_t k = 0; k < theta.size(); ++k) {
    st.m[k] = p.beta1 * st.m[k] + (1.0 - p.beta1) * grad[k];
    st.v[k] = p.beta2 * st.v[k] + (1.0 - p.beta2) * grad[k] * grad[k];
    theta[k] -= lr * (st.m[k] / bc1) / (std::sqrt(st.v[k] / bc2) + p.eps);
  }
}

inline void adam_step(Field2D& theta, const Field2D& grad, AdamState& st, double lr,
                      const AdamParams& p = {}) {
  require_same_shape(theta, grad, "adam");
  adam_step(theta.vec(), grad.vec(), st, lr, p);
}

}  // namespace redfwi
