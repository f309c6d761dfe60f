#pragma once

#include <random>
#include <string>
#include <vector>

#include "mcppi/parameter.hpp"
#include "mcppi/tensor.hpp"

namespace mcppi {

enum class Mode { kTrain, kEval };

/// Glorot-uniform initialized (fan_in x fan_out) weight.
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

/// y = x W (+ b). Row-vector convention: x is n x in, W is in x out.
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, bool bias, std::mt19937_64& rng);

  Tensor forward(const Tensor& x) const;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  bool has_bias() const { return has_bias_; }
  std::size_t in_features() const { return weight_.shape().rows; }
  std::size_t out_features() const { return weight_.shape().cols; }
  void collect(ParameterList& out);

 private:
  Parameter weight_;
  Parameter bias_;
  bool has_bias_ = false;
};

class BatchNorm;
/// Functional form used by BatchNorm::forward; exposed for gradient checks.
Tensor batch_norm(const Tensor& x, BatchNorm& state, Mode mode);

/// Per-feature batch normalization over the rows of an n x F input, with
/// learnable scale/shift and running statistics for eval mode.
class BatchNorm {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm() = default;
  BatchNorm(const std::string& name, std::size_t features);

  /// Train mode uses batch statistics (requires n >= 2) and updates the
  /// running mean / unbiased variance; eval mode uses the running values.
  Tensor forward(const Tensor& x, Mode mode);

  Parameter& scale() { return scale_; }
  Parameter& shift() { return shift_; }
  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }
  std::size_t features() const { return running_mean_.size(); }

  void collect(ParameterList& out);
  void export_buffers(StateDict& out) const;
  void import_buffers(const StateDict& in);

 private:
  friend Tensor batch_norm(const Tensor& x, BatchNorm& state, Mode mode);

  std::string name_;
  Parameter scale_;
  Parameter shift_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
};

}  // namespace mcppi
