#include "mcppi/hgnn.hpp"

#include "mcppi/errors.hpp"

namespace mcppi {

MessageIndex MessageIndex::from_graph(const HeteroProteinGraph& g) {
  MessageIndex idx;
  idx.n_nodes = g.n_nodes;
  for (Relation r : kRelations) {
    const auto k = static_cast<std::size_t>(r);
    for (const Edge& e : g.relation(r)) {
      idx.receivers[k].push_back(e.src);
      idx.senders[k].push_back(e.dst);
    }
  }
  return idx;
}

HgnnLayer::HgnnLayer(const std::string& name, std::size_t in, std::size_t out, bool linear_output,
                     std::mt19937_64& rng)
    : linear_output_(linear_output) {
  for (Relation r : kRelations) {
    relation_weights_[static_cast<std::size_t>(r)] =
        Parameter(name + ".W_" + relation_name(r), glorot_uniform(in, out, rng));
  }
  self_weight_ = Parameter(name + ".W_h", glorot_uniform(out, out, rng));
  if (!linear_output_) bn_ = BatchNorm(name + ".bn", out);
}

Tensor HgnnLayer::pre_activation(const MessageIndex& index, const Tensor& h) const {
  if (h.rows() != index.n_nodes) {
    throw DimensionError("hgnn: feature rows " + std::to_string(h.rows()) + " != graph nodes " +
                         std::to_string(index.n_nodes));
  }
  if (h.cols() != in_features()) {
    throw DimensionError("hgnn: feature width " + std::to_string(h.cols()) + " != layer input " +
                         std::to_string(in_features()));
  }
  Tensor total;
  bool first = true;
  for (std::size_t k = 0; k < kNumRelations; ++k) {
    const Tensor messages = gather_rows(h, index.senders[k]);
    const Tensor aggregated = segment_sum(messages, index.receivers[k], index.n_nodes);
    const Tensor transformed = matmul(aggregated, relation_weights_[k].tensor());
    total = first ? transformed : add(total, transformed);
    first = false;
  }
  return matmul(total, self_weight_.tensor());
}

Tensor HgnnLayer::forward(const MessageIndex& index, const Tensor& h, Mode mode) {
  Tensor pre = pre_activation(index, h);
  if (linear_output_) return pre;
  return bn_.forward(relu(pre), mode);
}

void HgnnLayer::collect(ParameterList& out) {
  for (auto& w : relation_weights_) out.push_back(&w);
  out.push_back(&self_weight_);
  if (!linear_output_) bn_.collect(out);
}

void HgnnLayer::export_buffers(StateDict& out) const {
  if (!linear_output_) bn_.export_buffers(out);
}

void HgnnLayer::import_buffers(const StateDict& in) {
  if (!linear_output_) bn_.import_buffers(in);
}

HgnnStack::HgnnStack(const std::string& name, StackDirection direction, std::size_t input_features,
                     std::size_t hidden, std::size_t layers, std::mt19937_64& rng)
    : direction_(direction) {
  if (layers < 1) throw ConfigError("hgnn needs at least one layer");
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t in = hidden, out = hidden;
    bool linear = false;
    if (direction == StackDirection::kEncoder) {
      if (l == 0) in = input_features;
    } else if (l + 1 == layers) {
      out = input_features;
      linear = true;
    }
    layers_.emplace_back(name + "." + std::to_string(l), in, out, linear, rng);
  }
}

Tensor HgnnStack::forward(const MessageIndex& index, const Tensor& x, Mode mode) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer.forward(index, h, mode);
  return h;
}

Tensor HgnnStack::forward(const HeteroProteinGraph& g, const Tensor& x, Mode mode) {
  return forward(MessageIndex::from_graph(g), x, mode);
}

void HgnnStack::collect(ParameterList& out) {
  for (auto& l : layers_) l.collect(out);
}

void HgnnStack::export_buffers(StateDict& out) const {
  for (const auto& l : layers_) l.export_buffers(out);
}

void HgnnStack::import_buffers(const StateDict& in) {
  for (auto& l : layers_) l.import_buffers(in);
}

}  // namespace mcppi
