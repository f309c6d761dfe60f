#pragma once

#include <vector>

#include "mcppi/parameter.hpp"

namespace mcppi {

struct AdamOptions {
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with L2 regularization folded into the gradient (g += wd * theta).
/// Moment buffers live as long as the optimizer.
class Adam {
 public:
  Adam(ParameterList params, AdamOptions options);

  void step();
  void zero_grad();

  const AdamOptions& options() const { return options_; }
  std::size_t steps_taken() const { return t_; }
  const ParameterList& parameters() const { return params_; }

 private:
  ParameterList params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

}  // namespace mcppi
