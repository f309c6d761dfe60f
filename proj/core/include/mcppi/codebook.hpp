#pragma once

#include <random>
#include <string>
#include <vector>

#include "mcppi/parameter.hpp"
#include "mcppi/tensor.hpp"

namespace mcppi {

/// |A| x F learnable microenvironment codes plus the learnable [MASK] vector.
class Codebook {
 public:
  Codebook() = default;
  /// Entries (and the mask vector) drawn i.i.d. from U[-1/|A|, 1/|A|].
  Codebook(const std::string& name, std::size_t size, std::size_t width, std::mt19937_64& rng);

  std::size_t size() const { return vectors_.shape().rows; }
  std::size_t width() const { return vectors_.shape().cols; }

  Parameter& vectors() { return vectors_; }
  const Parameter& vectors() const { return vectors_; }
  Parameter& mask_vector() { return mask_vector_; }
  const Parameter& mask_vector() const { return mask_vector_; }

  void collect(ParameterList& out);

 private:
  Parameter vectors_;
  Parameter mask_vector_;
};

/// Index of the nearest code (Euclidean) for every row of `h`; ties go to
/// the lowest index. Throws NumericError on NaN input.
std::vector<std::size_t> nearest_codes(const Tensor& h, const Codebook& cb);

struct QuantizationResult {
  std::vector<std::size_t> codes;
  /// Rows e_{z_m}; differentiable w.r.t. the codebook.
  Tensor quantized;
  /// Forward value e_{z_m}, gradient copied to h (straight-through).
  Tensor straight_through;
};

QuantizationResult quantize(const Tensor& h, const Codebook& cb);

struct VqLossTerms {
  Tensor reconstruction;  // mean ||x - x_hat||^2
  Tensor codebook;        // mean ||sg[h] - e_z||^2
  Tensor commitment;      // beta * mean ||h - sg[e_z]||^2
  Tensor total;
};

VqLossTerms vq_loss(const Tensor& x, const Tensor& x_hat, const Tensor& h, const QuantizationResult& q,
                    double beta);

/// Set of masked code indices.
struct MaskPlan {
  std::vector<std::size_t> masked;  // sorted, distinct
  std::vector<bool> is_masked;      // size |A|
  double ratio = 0.0;

  bool contains(std::size_t code) const { return code < is_masked.size() && is_masked[code]; }
  static MaskPlan none(std::size_t codebook_size);
};

/// Uniformly samples round(ratio*|A|) codes without replacement.
/// Throws ConfigError if ratio is outside (0, 1) or rounds to zero codes.
MaskPlan sample_mask(std::size_t codebook_size, double ratio, std::mt19937_64& rng);

struct MaskedLookup {
  Tensor rows;                            // M x F
  std::vector<std::size_t> masked_nodes;  // residues m with z_m in the plan
};

/// Row m is the mask vector if z_m is masked, else the code vector e_{z_m}.
MaskedLookup masked_lookup(const std::vector<std::size_t>& codes, const Codebook& cb, const MaskPlan& plan);

/// Scaled cosine error (1 - cos(x, x_tilde))^gamma averaged over the listed
/// residues. Empty list -> 0 (with a warning).
Tensor mcm_loss(const Tensor& x, const Tensor& x_tilde, const std::vector<std::size_t>& masked_nodes, double gamma);

/// L_VQ + eta * L_MCM
Tensor pretrain_loss(const Tensor& vq, const Tensor& mcm, double eta);

/// Per-code assignment counts.
std::vector<std::size_t> code_usage(const std::vector<std::size_t>& codes, std::size_t codebook_size);

/// Shannon entropy (nats) of the empirical code-usage distribution.
double usage_entropy(const std::vector<std::size_t>& usage);

}  // namespace mcppi
