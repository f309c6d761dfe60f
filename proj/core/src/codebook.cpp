#include "mcppi/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "mcppi/errors.hpp"

namespace mcppi {

Codebook::Codebook(const std::string& name, std::size_t size, std::size_t width, std::mt19937_64& rng) {
  if (size < 1) throw ConfigError("codebook size must be >= 1");
  if (width < 1) throw ConfigError("codebook width must be >= 1");
  const double a = 1.0 / static_cast<double>(size);
  vectors_ = Parameter(name + ".vectors", Tensor::uniform({size, width}, -a, a, rng));
  mask_vector_ = Parameter(name + ".mask_vector", Tensor::uniform({1, width}, -a, a, rng));
}

void Codebook::collect(ParameterList& out) {
  out.push_back(&vectors_);
  out.push_back(&mask_vector_);
}

std::vector<std::size_t> nearest_codes(const Tensor& h, const Codebook& cb) {
  if (h.cols() != cb.width()) {
    throw DimensionError("quantize: width " + std::to_string(h.cols()) + " != codebook width " +
                         std::to_string(cb.width()));
  }
  const std::size_t f = h.cols(), k = cb.size();
  const auto hv = h.values();
  const auto ev = cb.vectors().values();
  std::vector<std::size_t> codes(h.rows());
  for (std::size_t m = 0; m < h.rows(); ++m) {
    const double* row = &hv[m * f];
    for (std::size_t j = 0; j < f; ++j) {
      if (std::isnan(row[j])) throw NumericError("quantize: NaN in encoder output row " + std::to_string(m));
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_n = 0;
    for (std::size_t n = 0; n < k; ++n) {
      const double* e = &ev[n * f];
      double d = 0.0;
      for (std::size_t j = 0; j < f && d < best; ++j) {
        const double t = row[j] - e[j];
        d += t * t;
      }
      if (d < best) {
        best = d;
        best_n = n;
      }
    }
    codes[m] = best_n;
  }
  return codes;
}

QuantizationResult quantize(const Tensor& h, const Codebook& cb) {
  QuantizationResult q;
  q.codes = nearest_codes(h, cb);
  q.quantized = gather_rows(cb.vectors().tensor(), q.codes);
  q.straight_through = straight_through(h, q.quantized.detach());
  return q;
}

namespace {

Tensor mean_sq_row_dist(const Tensor& a, const Tensor& b) {
  const Tensor d = sub(a, b);
  return scale(sum(mul(d, d)), 1.0 / static_cast<double>(a.rows()));
}

}  // namespace

VqLossTerms vq_loss(const Tensor& x, const Tensor& x_hat, const Tensor& h, const QuantizationResult& q,
                    double beta) {
  if (x.rows() != x_hat.rows() || x.rows() != h.rows() || x.rows() != q.quantized.rows()) {
    throw DimensionError("vq_loss: row counts differ");
  }
  VqLossTerms t;
  t.reconstruction = mean_sq_row_dist(x, x_hat);
  t.codebook = mean_sq_row_dist(stop_gradient(h), q.quantized);
  t.commitment = scale(mean_sq_row_dist(h, stop_gradient(q.quantized)), beta);
  t.total = add(add(t.reconstruction, t.codebook), t.commitment);
  return t;
}

MaskPlan MaskPlan::none(std::size_t codebook_size) {
  MaskPlan p;
  p.is_masked.assign(codebook_size, false);
  return p;
}

MaskPlan sample_mask(std::size_t codebook_size, double ratio, std::mt19937_64& rng) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("mask ratio must be in (0, 1)");
  const auto count = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(codebook_size)));
  if (count == 0) {
    throw ConfigError("mask ratio " + std::to_string(ratio) + " masks no code of a codebook of size " +
                      std::to_string(codebook_size));
  }
  std::vector<std::size_t> all(codebook_size);
  std::iota(all.begin(), all.end(), 0);
  MaskPlan plan = MaskPlan::none(codebook_size);
  plan.ratio = ratio;
  std::sample(all.begin(), all.end(), std::back_inserter(plan.masked), static_cast<std::ptrdiff_t>(count), rng);
  for (auto c : plan.masked) plan.is_masked[c] = true;
  return plan;
}

MaskedLookup masked_lookup(const std::vector<std::size_t>& codes, const Codebook& cb, const MaskPlan& plan) {
  const std::size_t mask_row = cb.size();
  const Tensor table = concat_rows(cb.vectors().tensor(), cb.mask_vector().tensor());
  std::vector<std::size_t> idx(codes.size());
  MaskedLookup out;
  for (std::size_t m = 0; m < codes.size(); ++m) {
    if (codes[m] >= cb.size()) throw IndexError("masked_lookup: code " + std::to_string(codes[m]) + " out of range");
    if (plan.contains(codes[m])) {
      idx[m] = mask_row;
      out.masked_nodes.push_back(m);
    } else {
      idx[m] = codes[m];
    }
  }
  out.rows = gather_rows(table, idx);
  return out;
}

Tensor mcm_loss(const Tensor& x, const Tensor& x_tilde, const std::vector<std::size_t>& masked_nodes, double gamma) {
  if (x.shape() != x_tilde.shape()) {
    throw DimensionError("mcm_loss: " + x.shape().str() + " vs " + x_tilde.shape().str());
  }
  if (masked_nodes.empty()) {
    spdlog::warn("mcm_loss: no residue was assigned a masked code in this batch; contributing 0");
    return Tensor::scalar(0.0);
  }
  const Tensor cos = cosine_sim(gather_rows(x, masked_nodes), gather_rows(x_tilde, masked_nodes));
  // 1 - cos can dip a few ulps below zero; relu keeps pow() real.
  const Tensor err = relu(sub(Tensor::scalar(1.0), cos));
  return mean(pow(err, gamma));
}

Tensor pretrain_loss(const Tensor& vq, const Tensor& mcm, double eta) {
  if (!std::isfinite(vq.item()) || !std::isfinite(mcm.item())) throw NumericError("pretrain loss is not finite");
  if (eta == 0.0) return vq;
  return add(vq, scale(mcm, eta));
}

std::vector<std::size_t> code_usage(const std::vector<std::size_t>& codes, std::size_t codebook_size) {
  std::vector<std::size_t> usage(codebook_size, 0);
  for (auto c : codes) ++usage.at(c);
  return usage;
}

double usage_entropy(const std::vector<std::size_t>& usage) {
  const double total = static_cast<double>(std::accumulate(usage.begin(), usage.end(), std::size_t{0}));
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (auto u : usage) {
    if (u == 0) continue;
    const double p = static_cast<double>(u) / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace mcppi
