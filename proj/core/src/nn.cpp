#include "mcppi/nn.hpp"

#include <cmath>

#include "mcppi/errors.hpp"

namespace mcppi {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return Tensor::uniform({fan_in, fan_out}, -a, a, rng);
}

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, bool bias, std::mt19937_64& rng)
    : weight_(name + ".weight", glorot_uniform(in, out, rng)),
      bias_(name + ".bias", Tensor::zeros({1, out})),
      has_bias_(bias) {}

Tensor Linear::forward(const Tensor& x) const {
  Tensor y = matmul(x, weight_.tensor());
  return has_bias_ ? add_row(y, bias_.tensor()) : y;
}

void Linear::collect(ParameterList& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

BatchNorm::BatchNorm(const std::string& name, std::size_t features)
    : name_(name),
      scale_(name + ".scale", Tensor::full({1, features}, 1.0)),
      shift_(name + ".shift", Tensor::zeros({1, features})),
      running_mean_(features, 0.0),
      running_var_(features, 1.0) {}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) { return batch_norm(x, *this, mode); }

void BatchNorm::collect(ParameterList& out) {
  out.push_back(&scale_);
  out.push_back(&shift_);
}

void BatchNorm::export_buffers(StateDict& out) const {
  const std::size_t f = features();
  out[name_ + ".running_mean"] = StateEntry{{1, f}, running_mean_};
  out[name_ + ".running_var"] = StateEntry{{1, f}, running_var_};
}

void BatchNorm::import_buffers(const StateDict& in) {
  for (auto [suffix, dst] : {std::pair{".running_mean", &running_mean_}, std::pair{".running_var", &running_var_}}) {
    auto it = in.find(name_ + suffix);
    if (it == in.end()) throw ValidationError("checkpoint has no buffer '" + name_ + suffix + "'");
    if (it->second.values.size() != dst->size()) {
      throw ValidationError("checkpoint buffer '" + name_ + suffix + "' has wrong size");
    }
    *dst = it->second.values;
  }
}

Tensor batch_norm(const Tensor& x, BatchNorm& state, Mode mode) {
  const std::size_t n = x.rows(), f = x.cols();
  if (f != state.features()) {
    throw DimensionError("batch_norm: input " + x.shape().str() + " vs " + std::to_string(state.features()) +
                         " features");
  }
  if (mode == Mode::kTrain && n < 2) {
    throw DimensionError("batch size error: batch_norm in train mode needs at least 2 rows, got " +
                         std::to_string(n));
  }
  const auto xs = x.values();
  std::vector<double> mu(f, 0.0), inv_std(f, 0.0);
  if (mode == Mode::kTrain) {
    std::vector<double> var(f, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) mu[j] += xs[i * f + j];
    for (auto& m : mu) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) {
        const double d = xs[i * f + j] - mu[j];
        var[j] += d * d;
      }
    for (std::size_t j = 0; j < f; ++j) {
      const double biased = var[j] / static_cast<double>(n);
      inv_std[j] = 1.0 / std::sqrt(biased + BatchNorm::kEpsilon);
      const double unbiased = var[j] / static_cast<double>(n - 1);
      auto& rm = state.running_mean_[j];
      auto& rv = state.running_var_[j];
      rm = (1.0 - BatchNorm::kMomentum) * rm + BatchNorm::kMomentum * mu[j];
      rv = (1.0 - BatchNorm::kMomentum) * rv + BatchNorm::kMomentum * unbiased;
    }
  } else {
    for (std::size_t j = 0; j < f; ++j) {
      mu[j] = state.running_mean()[j];
      inv_std[j] = 1.0 / std::sqrt(state.running_var()[j] + BatchNorm::kEpsilon);
    }
  }

  std::vector<double> xhat(n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) xhat[i * f + j] = (xs[i * f + j] - mu[j]) * inv_std[j];

  const Tensor normalized = [&] {
    auto node = std::make_shared<detail::Node>();
    node->shape = x.shape();
    node->value = xhat;
    node->requires_grad = x.requires_grad();
    if (node->requires_grad) {
      auto px = x.node();
      node->parents = {px};
      const bool train = mode == Mode::kTrain;
      node->backward = [px, xhat, inv_std, n, f, train](detail::Node& self) {
        double* gx = px->grad_buffer();
        const auto& g = self.grad;
        if (!train) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) gx[i * f + j] += g[i * f + j] * inv_std[j];
          return;
        }
        // dx = inv_std / n * (n*g - sum(g) - xhat * sum(g*xhat))
        for (std::size_t j = 0; j < f; ++j) {
          double sg = 0.0, sgx = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            sg += g[i * f + j];
            sgx += g[i * f + j] * xhat[i * f + j];
          }
          const double dn = static_cast<double>(n);
          for (std::size_t i = 0; i < n; ++i) {
            gx[i * f + j] += inv_std[j] / dn * (dn * g[i * f + j] - sg - xhat[i * f + j] * sgx);
          }
        }
      };
    }
    return Tensor(std::move(node));
  }();

  // Scale/shift as ordinary differentiable ops on a 1 x F row.
  const Tensor ones = Tensor::full({n, 1}, 1.0);
  return add(mul(normalized, matmul(ones, state.scale().tensor())), matmul(ones, state.shift().tensor()));
}

}  // namespace mcppi
