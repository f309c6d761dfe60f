#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcppi/nn.hpp"
#include "mcppi/tensor.hpp"

namespace mcppi {

/// Activation, Binding, Catalysis, Expression, Inhibition, Ptmod, Reaction.
inline constexpr std::size_t kNumInteractionTypes = 7;
using LabelVector = std::array<std::uint8_t, kNumInteractionTypes>;

/// One labelled interaction; a < b is not required but a != b is.
struct PpiEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  LabelVector labels{};
};

struct PpiGraph {
  std::vector<std::string> protein_ids;  // index -> id
  Tensor node_features;                  // N x 2F; may be empty before embedding
  std::vector<PpiEdge> edges;

  std::size_t n_proteins() const { return protein_ids.size(); }
  std::optional<std::size_t> index_of(const std::string& id) const;
  /// Edge labels as a constant |E| x C tensor, restricted to `entries`.
  Tensor label_matrix(const std::vector<std::size_t>& entries) const;

  /// Throws ValidationError on self-loops, duplicate unordered pairs,
  /// out-of-range endpoints or entries without any positive type.
  void validate() const;
};

/// PPI edge CSV: header `id_a,id_b,y1,...,y7`, one interaction per row.
/// Protein indices are assigned in lexicographic id order.
PpiGraph load_ppi_edges(const std::filesystem::path& path);
PpiGraph parse_ppi_edges(const std::string& text);
void save_ppi_edges(const std::filesystem::path& path, const PpiGraph& g);

/// Mean over residues of [e_{z_m} || h_m]: a 1 x 2F protein embedding.
Tensor readout(const Tensor& code_rows, const Tensor& h);

/// Undirected message index over PPI edges (each edge contributes both ways).
struct PpiAdjacency {
  std::size_t n_nodes = 0;
  std::vector<std::size_t> receivers;
  std::vector<std::size_t> senders;

  static PpiAdjacency from_edges(std::size_t n_nodes, const std::vector<PpiEdge>& edges);
};

class GinLayer {
 public:
  GinLayer() = default;
  GinLayer(const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng);

  /// (1 + eps) z_i + sum_{j ~ i} z_j, the input to g.
  Tensor aggregate(const PpiAdjacency& adj, const Tensor& z) const;
  /// g(aggregate(z))
  Tensor forward(const PpiAdjacency& adj, const Tensor& z) const;

  Parameter& eps() { return eps_; }
  Linear& transform() { return g_; }
  void collect(ParameterList& out);

 private:
  Parameter eps_;
  Linear g_;
};

/// GIN stack with ReLU between layers (not after the last one).
Tensor gin_forward(std::vector<GinLayer>& layers, const PpiAdjacency& adj, const Tensor& features);

/// FC(z_i (.) z_j) for every listed pair -> P x C logits.
Tensor pair_logits(const Tensor& z, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                   const Linear& fc);
/// Single pair form.
Tensor pair_logits(const Tensor& z_i, const Tensor& z_j, const Linear& fc);

/// Mean over entries and classes of BCE on sigmoid outputs.
Tensor ppi_bce_loss(const Tensor& logits, const Tensor& labels);

/// GIN encoder plus pairwise classifier.
class PpiModel {
 public:
  PpiModel() = default;
  PpiModel(std::size_t input_features, std::size_t hidden, std::size_t layers, std::mt19937_64& rng);

  Tensor encode(const PpiAdjacency& adj, const Tensor& features);
  Tensor logits(const Tensor& z, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const;

  std::vector<GinLayer>& layers() { return layers_; }
  Linear& classifier() { return fc_; }
  ParameterList parameters();

 private:
  std::vector<GinLayer> layers_;
  Linear fc_;
};

}  // namespace mcppi
