#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mcppi/protein_graph.hpp"
#include "mcppi/splits.hpp"
#include "mcppi/synth.hpp"

namespace mcppi {

enum class Ablation { kNone, kNoMask, kMlm, kMhm, kNoVq };
const char* ablation_name(Ablation a);
Ablation parse_ablation(const std::string& s);

/// Every hyperparameter of a run. TOML keys (top-level table) match the
/// names in the trailing comments.
struct RunConfig {
  std::size_t seq_window = 2;        // d_s
  double radius = 10.0;              // d_r
  std::size_t knn = 5;               // K
  std::size_t layers = 4;            // L
  std::size_t hidden = 128;          // F
  std::size_t codebook_size = 512;   // codebook_size
  double mask_ratio = 0.15;          // mask_ratio
  double beta = 0.25;                // beta
  double gamma = 2.0;                // gamma
  double eta = 1.0;                  // eta
  std::size_t ppi_layers = 2;        // L_s
  std::size_t ppi_hidden = 1024;     // hidden_ppi
  double lr = 1e-3;                  // lr
  double weight_decay = 1e-4;        // weight_decay
  double pretrain_lr = 0.0;          // lr_pre; 0 means "use lr"
  std::size_t pretrain_epochs = 50;  // E_pre
  std::size_t ppi_epochs = 500;      // E
  std::size_t num_classes = 7;       // C
  SplitScheme scheme = SplitScheme::kRandom;  // scheme
  std::uint64_t seed = 0;            // seed
  Ablation ablation = Ablation::kNone;        // ablation

  GraphParams graph_params() const { return {seq_window, radius, knn}; }
  double effective_pretrain_lr() const { return pretrain_lr > 0.0 ? pretrain_lr : lr; }

  /// Throws ConfigError on any out-of-range field.
  void validate() const;

  /// Smaller widths and epoch counts for laptop-sized runs.
  static RunConfig desk();
};

/// Parameters of the `gen` subcommand ([synth] table).
struct SynthConfig {
  std::size_t n_proteins = 100;
  std::size_t n_classes = 8;
  std::size_t n_edges = 400;
  LengthRange length{40, 80};  // min_len / max_len
  std::size_t trait_dim = 2;
  double homophily = 12.0;
  std::uint64_t seed = 0;
};

struct ConfigFile {
  RunConfig run;
  SynthConfig synth;
};

/// Unknown keys and wrongly typed values raise ConfigError. Missing keys
/// keep their defaults.
ConfigFile parse_config_toml(const std::string& text);
ConfigFile load_config_toml(const std::filesystem::path& path);
std::string config_to_toml(const ConfigFile& cfg);

}  // namespace mcppi
