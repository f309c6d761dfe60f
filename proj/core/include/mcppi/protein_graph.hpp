#pragma once

#include <array>
#include <string>
#include <vector>

#include "mcppi/protein.hpp"

namespace mcppi {

enum class Relation : std::size_t { kSequential = 0, kRadius = 1, kKNearest = 2 };
inline constexpr std::size_t kNumRelations = 3;
inline constexpr std::array<Relation, kNumRelations> kRelations = {Relation::kSequential, Relation::kRadius,
                                                                  Relation::kKNearest};
const char* relation_name(Relation r);

struct Edge {
  std::size_t src;
  std::size_t dst;
  auto operator<=>(const Edge&) const = default;
};

/// Residue graph with one edge list per relation. Each list is sorted by
/// (src, dst). An edge (m, n) means n is a neighbour of m under that
/// relation: Sequential and Radius lists are symmetric, KNearest holds the
/// K nearest residues of every src.
struct HeteroProteinGraph {
  std::string protein_id;
  std::size_t n_nodes = 0;
  std::array<std::vector<Edge>, kNumRelations> edges;

  const std::vector<Edge>& relation(Relation r) const { return edges[static_cast<std::size_t>(r)]; }
  std::size_t num_edges() const;
  /// Neighbours n with (m, n) in relation r, ascending.
  std::vector<std::size_t> neighbors(Relation r, std::size_t m) const;
};

struct GraphParams {
  std::size_t seq_window = 2;  // d_s: |m - n| <= d_s
  double radius = 10.0;        // d_r in Angstrom, inclusive
  std::size_t k = 5;           // neighbours per residue for KNearest
};

/// Throws ConfigError on invalid params and InputError on non-finite
/// coordinates or M < 2.
HeteroProteinGraph build_hetero_graph(const Protein& p, const GraphParams& params);

struct Microenvironment {
  std::size_t center = 0;
  std::vector<std::size_t> members;  // sorted, contains center
};

/// {m} united with m's neighbours under all three relations.
Microenvironment extract_microenvironment(const HeteroProteinGraph& g, std::size_t m);

}  // namespace mcppi
