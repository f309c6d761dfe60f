#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mcppi/ppi_net.hpp"
#include "mcppi/protein.hpp"

namespace mcppi {

using AminoAcidWeights = std::array<double, kNumAminoAcids>;

/// Inclusive residue-count range.
struct LengthRange {
  std::size_t min = 40;
  std::size_t max = 80;
};

inline constexpr double kBondLength = 3.8;
inline constexpr double kClearance = 2.0;

/// Per-residue backbone shape: bond angle (degrees) between successive
/// steps, with uniform jitter of +-jitter_deg.
struct WalkStyle {
  double bend_deg = 70.0;
  double jitter_deg = 15.0;
};

/// Self-avoiding Calpha walk: fixed 3.8 A steps and >= 2.0 A between any two
/// residues. `styles` holds one entry per residue (or a single entry for
/// all). Throws GenerationError once the retry budget is exhausted.
std::vector<Vec3> self_avoiding_walk(std::size_t length, const std::vector<WalkStyle>& styles, std::uint64_t seed);

/// Random protein whose residues are drawn from `weights` (uniform by
/// default).
Protein gen_protein(const std::string& id, const LengthRange& len, std::uint64_t seed);
Protein gen_protein(const std::string& id, const LengthRange& len, std::uint64_t seed, const AminoAcidWeights& weights);

struct MicroenvTemplate {
  AminoAcidWeights aa_weights{};
  WalkStyle style;
};

struct PlantedConfig {
  LengthRange length{40, 80};
  std::size_t segment_min = 12;
  std::size_t segment_max = 24;
  double dominant_mass = 0.9;         // shared by the class's two signature residue types
  double mixture_concentration = 0.5;  // symmetric Dirichlet over classes, one draw per protein
};

struct PlantedDataset {
  std::vector<Protein> proteins;
  std::vector<std::vector<std::size_t>> residue_classes;  // parallel to proteins
  std::vector<MicroenvTemplate> templates;
  std::size_t n_classes = 0;

  /// Row i: fraction of protein i's residues carrying each class.
  std::vector<std::vector<double>> class_histograms() const;
};

/// Class c favours residue types (c*s) and (c*s + 1) mod 20, s = max(1, 20/n),
/// and bends more sharply as c grows.
std::vector<MicroenvTemplate> make_templates(std::size_t n_classes, double dominant_mass = 0.9);

/// Proteins built from contiguous segments, each drawn from one latent
/// template (residue types and backbone bend). Ids are "P0000", "P0001", ...
PlantedDataset gen_planted_microenv_dataset(std::size_t n_classes, std::size_t n_proteins, std::uint64_t seed,
                                            const PlantedConfig& config = {});

struct PpiRuleConfig {
  std::size_t trait_dim = 2;
  double homophily = 12.0;       // preference for pairs with similar traits
  std::size_t degree_slack = 1;  // degree cap = ceil(2E / N) + slack
};

struct SyntheticPpi {
  PpiGraph graph;
  std::vector<std::vector<double>> traits;  // indexed like graph.protein_ids
};

/// Traits are a fixed random projection of each protein's centred class
/// histogram. Each interaction type c is positive when the symmetric
/// bilinear score t_a' A_c t_b clears that type's median over the sampled
/// pairs; an entry with no positive type takes the type with the largest
/// margin. Pairs are distinct and drawn with weight
/// exp(-homophily * |t_a - t_b|^2 / median gap), first under a degree cap,
/// then without it if the cap leaves the target unmet.
SyntheticPpi gen_ppi_graph(const PlantedDataset& data, std::size_t n_edges, std::uint64_t rule_seed,
                           const PpiRuleConfig& config = {});

/// Symmetric pairwise features for a bilinear probe: upper triangle of
/// (t_a t_b' + t_b t_a') / 2 followed by a constant 1.
std::vector<double> pair_trait_features(const std::vector<double>& ta, const std::vector<double>& tb);

}  // namespace mcppi
