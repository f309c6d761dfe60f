#include "mcppi/optim.hpp"

#include <cmath>

namespace mcppi {

Adam::Adam(ParameterList params, AdamOptions options) : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Parameter* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    auto theta = p.mutable_values();
    const auto g = p.raw_grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = (g.empty() ? 0.0 : g[i]) + options_.weight_decay * theta[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * gi;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

}  // namespace mcppi
