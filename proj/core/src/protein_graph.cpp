#include "mcppi/protein_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "mcppi/errors.hpp"

namespace mcppi {

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::kSequential: return "sequential";
    case Relation::kRadius: return "radius";
    case Relation::kKNearest: return "knearest";
  }
  return "?";
}

std::size_t HeteroProteinGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

std::vector<std::size_t> HeteroProteinGraph::neighbors(Relation r, std::size_t m) const {
  const auto& list = relation(r);
  auto lo = std::lower_bound(list.begin(), list.end(), Edge{m, 0});
  std::vector<std::size_t> out;
  for (auto it = lo; it != list.end() && it->src == m; ++it) out.push_back(it->dst);
  return out;
}

namespace {

std::vector<Edge> sequential_edges(std::size_t m_count, std::size_t window) {
  std::vector<Edge> out;
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t lo = m >= window ? m - window : 0;
    const std::size_t hi = std::min(m_count - 1, m + window);
    for (std::size_t n = lo; n <= hi; ++n)
      if (n != m) out.push_back({m, n});
  }
  return out;
}

// Uniform grid with cell edge = radius, so candidates live in the 27
// surrounding cells.
std::vector<Edge> radius_edges(const std::vector<Vec3>& x, double radius) {
  using Cell = std::tuple<long, long, long>;
  auto cell_of = [radius](const Vec3& p) {
    return Cell{static_cast<long>(std::floor(p[0] / radius)), static_cast<long>(std::floor(p[1] / radius)),
                static_cast<long>(std::floor(p[2] / radius))};
  };
  std::map<Cell, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < x.size(); ++i) grid[cell_of(x[i])].push_back(i);

  std::vector<Edge> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [cx, cy, cz] = cell_of(x[i]);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({cx + dx, cy + dy, cz + dz});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second)
            if (j != i && distance(x[i], x[j]) <= radius) out.push_back({i, j});
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> knn_edges(const std::vector<Vec3>& x, std::size_t k) {
  std::vector<Edge> out;
  const std::size_t take = std::min(k, x.size() - 1);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cand.clear();
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) cand.emplace_back(distance(x[i], x[j]), j);
    // (distance, index) ordering breaks ties toward the lower residue index.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    std::vector<std::size_t> nn;
    for (std::size_t t = 0; t < take; ++t) nn.push_back(cand[t].second);
    std::sort(nn.begin(), nn.end());
    for (std::size_t j : nn) out.push_back({i, j});
  }
  return out;
}

}  // namespace

HeteroProteinGraph build_hetero_graph(const Protein& p, const GraphParams& params) {
  if (params.seq_window < 1) throw ConfigError("d_s must be >= 1");
  if (!(params.radius > 0.0)) throw ConfigError("d_r must be > 0");
  if (params.k < 1) throw ConfigError("K must be >= 1");
  if (p.coords.size() < 2) throw InputError("protein '" + p.id + "' needs at least 2 residues");
  for (const auto& c : p.coords)
    for (double v : c)
      if (!std::isfinite(v)) throw InputError("protein '" + p.id + "' has non-finite coordinates");

  HeteroProteinGraph g;
  g.protein_id = p.id;
  g.n_nodes = p.coords.size();
  g.edges[static_cast<std::size_t>(Relation::kSequential)] = sequential_edges(g.n_nodes, params.seq_window);
  g.edges[static_cast<std::size_t>(Relation::kRadius)] = radius_edges(p.coords, params.radius);
  g.edges[static_cast<std::size_t>(Relation::kKNearest)] = knn_edges(p.coords, params.k);
  return g;
}

Microenvironment extract_microenvironment(const HeteroProteinGraph& g, std::size_t m) {
  if (m >= g.n_nodes) throw IndexError("residue " + std::to_string(m) + " >= " + std::to_string(g.n_nodes));
  Microenvironment env;
  env.center = m;
  env.members.push_back(m);
  for (Relation r : kRelations) {
    auto nb = g.neighbors(r, m);
    env.members.insert(env.members.end(), nb.begin(), nb.end());
  }
  std::sort(env.members.begin(), env.members.end());
  env.members.erase(std::unique(env.members.begin(), env.members.end()), env.members.end());
  return env;
}

}  // namespace mcppi
