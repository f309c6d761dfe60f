#include "mcppi/ppi_net.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mcppi/errors.hpp"

namespace mcppi {

std::optional<std::size_t> PpiGraph::index_of(const std::string& id) const {
  auto it = std::lower_bound(protein_ids.begin(), protein_ids.end(), id);
  if (it != protein_ids.end() && *it == id) return static_cast<std::size_t>(it - protein_ids.begin());
  // Fall back to a scan for graphs whose ids are not sorted.
  auto lin = std::find(protein_ids.begin(), protein_ids.end(), id);
  if (lin == protein_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(lin - protein_ids.begin());
}

Tensor PpiGraph::label_matrix(const std::vector<std::size_t>& entries) const {
  std::vector<double> v;
  v.reserve(entries.size() * kNumInteractionTypes);
  for (auto e : entries)
    for (auto y : edges.at(e).labels) v.push_back(static_cast<double>(y));
  return Tensor::from({entries.size(), kNumInteractionTypes}, std::move(v));
}

void PpiGraph::validate() const {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const std::string where = "ppi entry " + std::to_string(k) + ": ";
    if (e.a >= n_proteins() || e.b >= n_proteins()) throw ValidationError(where + "endpoint out of range");
    if (e.a == e.b) throw ValidationError(where + "self-interaction of " + protein_ids[e.a]);
    if (!seen.insert(std::minmax(e.a, e.b)).second) {
      throw ValidationError(where + "duplicate pair " + protein_ids[e.a] + "," + protein_ids[e.b]);
    }
    bool any = false;
    for (auto y : e.labels) {
      if (y > 1) throw ValidationError(where + "labels must be 0/1");
      any = any || y == 1;
    }
    if (!any) throw ValidationError(where + "no positive interaction type");
  }
  if (node_features.size() != 0 && node_features.rows() != n_proteins()) {
    throw ValidationError("ppi graph: " + std::to_string(node_features.rows()) + " feature rows for " +
                          std::to_string(n_proteins()) + " proteins");
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

PpiGraph parse_ppi_edges(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::size_t line_number = 0;
  struct Raw {
    std::string a, b;
    LabelVector y;
  };
  std::vector<Raw> raw;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() == 2 + kNumInteractionTypes && cells[0] == "id_a") continue;
      throw ParseError("ppi csv line 1: expected header id_a,id_b,y1..y7");
    }
    if (cells.size() != 2 + kNumInteractionTypes) {
      throw ParseError("ppi csv line " + std::to_string(line_number) + ": expected " +
                       std::to_string(2 + kNumInteractionTypes) + " columns, got " + std::to_string(cells.size()));
    }
    Raw r{cells[0], cells[1], {}};
    for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
      const auto& v = cells[2 + c];
      if (v != "0" && v != "1") {
        throw ParseError("ppi csv line " + std::to_string(line_number) + ": label '" + v + "' is not 0/1");
      }
      r.y[c] = v == "1" ? 1 : 0;
    }
    raw.push_back(std::move(r));
  }
  std::set<std::string> ids;
  for (const auto& r : raw) {
    ids.insert(r.a);
    ids.insert(r.b);
  }
  PpiGraph g;
  g.protein_ids.assign(ids.begin(), ids.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.protein_ids.size(); ++i) index[g.protein_ids[i]] = i;
  for (const auto& r : raw) g.edges.push_back({index[r.a], index[r.b], r.y});
  g.validate();
  return g;
}

PpiGraph load_ppi_edges(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_ppi_edges(ss.str());
}

void save_ppi_edges(const std::filesystem::path& path, const PpiGraph& g) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "id_a,id_b";
  for (std::size_t c = 1; c <= kNumInteractionTypes; ++c) os << ",y" << c;
  os << '\n';
  for (const auto& e : g.edges) {
    os << g.protein_ids[e.a] << ',' << g.protein_ids[e.b];
    for (auto y : e.labels) os << ',' << static_cast<int>(y);
    os << '\n';
  }
}

Tensor readout(const Tensor& code_rows, const Tensor& h) {
  if (h.rows() == 0) throw InputError("readout of a protein with no residues");
  if (code_rows.rows() != h.rows()) throw DimensionError("readout: code rows and h rows differ");
  return col_mean(concat_cols(code_rows, h));
}

PpiAdjacency PpiAdjacency::from_edges(std::size_t n_nodes, const std::vector<PpiEdge>& edges) {
  PpiAdjacency adj;
  adj.n_nodes = n_nodes;
  for (const auto& e : edges) {
    adj.receivers.push_back(e.a);
    adj.senders.push_back(e.b);
    adj.receivers.push_back(e.b);
    adj.senders.push_back(e.a);
  }
  return adj;
}

GinLayer::GinLayer(const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng)
    : eps_(name + ".eps", Tensor::zeros({1, 1})), g_(name + ".g", in, out, true, rng) {}

Tensor GinLayer::aggregate(const PpiAdjacency& adj, const Tensor& z) const {
  if (z.rows() != adj.n_nodes) throw DimensionError("gin: feature rows do not match node count");
  const Tensor self = mul(add(Tensor::scalar(1.0), eps_.tensor()), z);
  const Tensor neigh = segment_sum(gather_rows(z, adj.senders), adj.receivers, adj.n_nodes);
  return add(self, neigh);
}

Tensor GinLayer::forward(const PpiAdjacency& adj, const Tensor& z) const { return g_.forward(aggregate(adj, z)); }

void GinLayer::collect(ParameterList& out) {
  out.push_back(&eps_);
  g_.collect(out);
}

Tensor gin_forward(std::vector<GinLayer>& layers, const PpiAdjacency& adj, const Tensor& features) {
  Tensor z = features;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    z = layers[l].forward(adj, z);
    if (l + 1 < layers.size()) z = relu(z);
  }
  return z;
}

Tensor pair_logits(const Tensor& z, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                   const Linear& fc) {
  if (a.size() != b.size()) throw DimensionError("pair_logits: endpoint lists differ in length");
  return fc.forward(mul(gather_rows(z, a), gather_rows(z, b)));
}

Tensor pair_logits(const Tensor& z_i, const Tensor& z_j, const Linear& fc) {
  if (z_i.shape() != z_j.shape()) throw DimensionError("pair_logits: " + z_i.shape().str() + " vs " + z_j.shape().str());
  return fc.forward(mul(z_i, z_j));
}

Tensor ppi_bce_loss(const Tensor& logits, const Tensor& labels) { return bce_with_logits(logits, labels); }

PpiModel::PpiModel(std::size_t input_features, std::size_t hidden, std::size_t layers, std::mt19937_64& rng) {
  if (layers < 1) throw ConfigError("GIN needs at least one layer");
  for (std::size_t l = 0; l < layers; ++l) {
    layers_.emplace_back("ppi.gin." + std::to_string(l), l == 0 ? input_features : hidden, hidden, rng);
  }
  fc_ = Linear("ppi.fc", hidden, kNumInteractionTypes, true, rng);
}

Tensor PpiModel::encode(const PpiAdjacency& adj, const Tensor& features) { return gin_forward(layers_, adj, features); }

Tensor PpiModel::logits(const Tensor& z, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const {
  return pair_logits(z, a, b, fc_);
}

ParameterList PpiModel::parameters() {
  ParameterList out;
  for (auto& l : layers_) l.collect(out);
  fc_.collect(out);
  return out;
}

}  // namespace mcppi
