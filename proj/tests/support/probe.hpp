#pragma once

#include <cmath>
#include <vector>

#include "mcppi/metrics.hpp"
#include "mcppi/ppi_net.hpp"
#include "mcppi/protein.hpp"
#include "mcppi/synth.hpp"

namespace mcppi::testing {

/// Per-type logistic regression on pair_trait_features of the true traits,
/// fit on `train` entries; returns flattened test probabilities and labels.
struct ProbeResult {
  std::vector<double> probs;
  std::vector<double> labels;
  double micro_f1 = 0.0;
};

inline ProbeResult trait_probe(const SyntheticPpi& data, const std::vector<std::size_t>& train,
                               const std::vector<std::size_t>& test, int iterations = 3000, double lr = 0.5) {
  const auto& g = data.graph;
  auto features = [&](std::size_t k) {
    return pair_trait_features(data.traits[g.edges[k].a], data.traits[g.edges[k].b]);
  };
  const std::size_t d = features(0).size();

  // Standardise every non-constant feature on the train entries.
  std::vector<double> mean(d, 0.0), sd(d, 1.0);
  for (auto k : train) {
    const auto f = features(k);
    for (std::size_t j = 0; j < d; ++j) mean[j] += f[j] / static_cast<double>(train.size());
  }
  for (std::size_t j = 0; j + 1 < d; ++j) {
    double v = 0.0;
    for (auto k : train) v += std::pow(features(k)[j] - mean[j], 2) / static_cast<double>(train.size());
    sd[j] = v > 0.0 ? std::sqrt(v) : 1.0;
  }
  mean[d - 1] = 0.0;
  auto standard = [&](std::size_t k) {
    auto f = features(k);
    for (std::size_t j = 0; j < d; ++j) f[j] = (f[j] - mean[j]) / sd[j];
    return f;
  };

  ProbeResult out;
  std::vector<std::vector<double>> xtrain, xtest;
  for (auto k : train) xtrain.push_back(standard(k));
  for (auto k : test) xtest.push_back(standard(k));
  for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
    std::vector<double> w(d, 0.0);
    for (int it = 0; it < iterations; ++it) {
      std::vector<double> grad(d, 0.0);
      for (std::size_t i = 0; i < train.size(); ++i) {
        double z = 0.0;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * xtrain[i][j];
        const double err = 1.0 / (1.0 + std::exp(-z)) - g.edges[train[i]].labels[c];
        for (std::size_t j = 0; j < d; ++j) grad[j] += err * xtrain[i][j] / static_cast<double>(train.size());
      }
      for (std::size_t j = 0; j < d; ++j) w[j] -= lr * grad[j];
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * xtest[i][j];
      out.probs.push_back(1.0 / (1.0 + std::exp(-z)));
      out.labels.push_back(g.edges[test[i]].labels[c]);
    }
  }
  out.micro_f1 = mcppi::micro_f1(out.probs, out.labels);
  return out;
}

}  // namespace mcppi::testing
