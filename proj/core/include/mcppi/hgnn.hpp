#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "mcppi/nn.hpp"
#include "mcppi/protein_graph.hpp"

namespace mcppi {

/// Gather/scatter index arrays for message passing over one protein graph.
/// For relation r, node m receives the sum of h_n over its edges (m, n).
struct MessageIndex {
  std::size_t n_nodes = 0;
  std::array<std::vector<std::size_t>, kNumRelations> receivers;
  std::array<std::vector<std::size_t>, kNumRelations> senders;

  static MessageIndex from_graph(const HeteroProteinGraph& g);
};

/// One heterogeneous message-passing layer:
///   h' = BN(ReLU(W_h . sum_r W_r . sum_{n in N_r(m)} h_n))
/// or just the linear pre-activation when `linear_output` is set.
class HgnnLayer {
 public:
  HgnnLayer() = default;
  HgnnLayer(const std::string& name, std::size_t in, std::size_t out, bool linear_output, std::mt19937_64& rng);

  Tensor forward(const MessageIndex& index, const Tensor& h, Mode mode);
  /// W_h . sum_r W_r . aggregate_r(h), before activation.
  Tensor pre_activation(const MessageIndex& index, const Tensor& h) const;

  std::size_t in_features() const { return relation_weights_[0].shape().rows; }
  std::size_t out_features() const { return self_weight_.shape().cols; }
  bool linear_output() const { return linear_output_; }

  Parameter& relation_weight(Relation r) { return relation_weights_[static_cast<std::size_t>(r)]; }
  Parameter& self_weight() { return self_weight_; }
  BatchNorm& batch_norm() { return bn_; }

  void collect(ParameterList& out);
  void export_buffers(StateDict& out) const;
  void import_buffers(const StateDict& in);

 private:
  std::array<Parameter, kNumRelations> relation_weights_;
  Parameter self_weight_;
  BatchNorm bn_;
  bool linear_output_ = false;
};

enum class StackDirection { kEncoder, kDecoder };

/// L stacked layers. The encoder maps F_in -> F; the decoder mirrors it
/// (F -> F_in) and ends with a linear layer so reconstructions are
/// unconstrained reals.
class HgnnStack {
 public:
  HgnnStack() = default;
  HgnnStack(const std::string& name, StackDirection direction, std::size_t input_features,
            std::size_t hidden, std::size_t layers, std::mt19937_64& rng);

  Tensor forward(const MessageIndex& index, const Tensor& x, Mode mode);
  Tensor forward(const HeteroProteinGraph& g, const Tensor& x, Mode mode);

  StackDirection direction() const { return direction_; }
  std::size_t in_features() const { return layers_.front().in_features(); }
  std::size_t out_features() const { return layers_.back().out_features(); }
  std::vector<HgnnLayer>& layers() { return layers_; }

  void collect(ParameterList& out);
  void export_buffers(StateDict& out) const;
  void import_buffers(const StateDict& in);

 private:
  StackDirection direction_ = StackDirection::kEncoder;
  std::vector<HgnnLayer> layers_;
};

/// Encoder forward, h^(0) = X.
inline Tensor hgnn_forward(HgnnStack& encoder, const HeteroProteinGraph& g, const Tensor& x, Mode mode) {
  return encoder.forward(g, x, mode);
}

/// Decoder forward from code-space vectors back to residue features.
inline Tensor decode(HgnnStack& decoder, const HeteroProteinGraph& g, const Tensor& z, Mode mode) {
  return decoder.forward(g, z, mode);
}

}  // namespace mcppi
