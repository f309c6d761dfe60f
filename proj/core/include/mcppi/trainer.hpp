#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mcppi/codebook.hpp"
#include "mcppi/config.hpp"
#include "mcppi/hgnn.hpp"
#include "mcppi/metrics.hpp"
#include "mcppi/ppi_net.hpp"
#include "mcppi/splits.hpp"

namespace mcppi {

/// A protein with its graph index and one-hot features built once.
struct PreparedProtein {
  std::string id;
  Tensor features;
  MessageIndex index;
};

std::vector<PreparedProtein> prepare_proteins(const std::vector<Protein>& proteins, const GraphParams& params);

/// Encoder, codebook and decoder of the pretraining stage.
class ProteinModel {
 public:
  ProteinModel() = default;
  ProteinModel(const RunConfig& cfg, std::uint64_t seed);

  HgnnStack& encoder() { return encoder_; }
  HgnnStack& decoder() { return decoder_; }
  Codebook& codebook() { return codebook_; }
  const Codebook& codebook() const { return codebook_; }
  std::size_t hidden() const { return codebook_.width(); }

  ParameterList parameters();
  /// Parameters plus batch-norm running statistics.
  StateDict state();
  /// Throws ConfigError when names or shapes disagree with this model.
  void load_state(const StateDict& state);

  /// Encoder output H (M x F) for one protein.
  Tensor encode(const PreparedProtein& p, Mode mode);

 private:
  HgnnStack encoder_;
  Codebook codebook_;
  HgnnStack decoder_;
};

/// Checkpoint directory: model.json (tensor state) and config.toml.
void save_checkpoint(const std::filesystem::path& dir, ProteinModel& model, const RunConfig& cfg);
ProteinModel load_checkpoint(const std::filesystem::path& dir, RunConfig& cfg);

struct PretrainLoss {
  Tensor total;
  VqLossTerms vq;
  Tensor mcm;
  std::vector<std::size_t> codes;
};

/// Objective on one protein for the configured ablation.
PretrainLoss pretrain_objective(ProteinModel& model, const PreparedProtein& p, const RunConfig& cfg, Mode mode,
                                std::mt19937_64& rng);

struct PretrainEpochLog {
  std::size_t epoch = 0;
  double total = 0.0;
  double reconstruction = 0.0;
  double codebook = 0.0;
  double commitment = 0.0;
  double mcm = 0.0;
  double usage_entropy = 0.0;
  std::size_t used_codes = 0;
};

struct PretrainOptions {
  std::function<void(const PretrainEpochLog&)> on_epoch;
};

/// One protein per Adam step, shuffled each epoch, mask resampled per step.
/// A non-finite loss restores the parameters from the start of the epoch
/// and throws NumericError.
std::vector<PretrainEpochLog> pretrain(ProteinModel& model, const std::vector<PreparedProtein>& proteins,
                                       const RunConfig& cfg, const PretrainOptions& options = {});

/// Mean objective in eval mode with a fixed mask seed.
double evaluate_pretrain_loss(ProteinModel& model, const std::vector<PreparedProtein>& proteins, const RunConfig& cfg);

void write_pretrain_log_csv(const std::filesystem::path& path, const std::vector<PretrainEpochLog>& log);

/// Code assignment of every residue in eval mode.
std::vector<std::vector<std::size_t>> assign_codes(ProteinModel& model, const std::vector<PreparedProtein>& proteins);

struct EmbeddingTable {
  std::vector<std::string> ids;
  Tensor matrix;  // N x 2F
};

/// Frozen readout [e || h] per protein (h || h when quantization is
/// ablated). `workers` > 1 spreads proteins over threads.
EmbeddingTable embed_all(ProteinModel& model, const std::vector<PreparedProtein>& proteins, const RunConfig& cfg,
                         std::size_t workers = 1);

/// Binary file: 8-byte magic "MCPPIEMB", uint64 N, uint64 2F, N*2F
/// little-endian doubles row-major. Ids and a cache key go to
/// `<path>.meta.json`.
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, const std::string& cache_key = "");
EmbeddingTable load_embeddings(const std::filesystem::path& path);
std::string embedding_cache_key(ProteinModel& model, const std::vector<Protein>& proteins, const RunConfig& cfg);

/// Loads `cache` when its key matches, else embeds and writes it.
EmbeddingTable embed_all_cached(ProteinModel& model, const std::vector<Protein>& proteins, const RunConfig& cfg,
                                const std::filesystem::path& cache, bool* hit = nullptr);

/// Orders embedding rows to match `graph.protein_ids`; throws InputError
/// when an id has no embedding.
Tensor align_embeddings(const EmbeddingTable& table, const PpiGraph& graph);

struct PpiEpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_micro_f1 = 0.0;
  double seconds = 0.0;
};

struct SubsetMetrics {
  std::string subset;  // ALL, BS, ES, NS
  std::size_t entries = 0;
  double micro_f1 = 0.0;
  double aupr = 0.0;  // NaN when the subset has no positive cell
};

struct PpiTrainOptions {
  /// When set, called at the start of every epoch to recompute node
  /// features (the re-encoding baseline).
  std::function<Tensor()> refresh_features;
  std::function<void(const PpiEpochLog&)> on_epoch;
};

struct PpiTrainResult {
  PpiModel model;  // best-validation weights
  std::vector<PpiEpochLog> history;
  std::size_t best_epoch = 0;
  double best_val_micro_f1 = 0.0;
  Tensor probabilities;  // |E| x C for every entry under the best weights
  std::vector<SubsetMetrics> test_report;
};

/// Full-graph GIN training on train-entry labels with best-validation
/// model selection. `graph.node_features` must hold the embeddings.
PpiTrainResult train_ppi(const PpiGraph& graph, const Partition& split, const RunConfig& cfg,
                         const PpiTrainOptions& options = {});

/// Sigmoid outputs for the listed entries.
Tensor predict_probabilities(PpiModel& model, const PpiGraph& graph, const Tensor& features,
                             const std::vector<std::size_t>& entries);

/// ALL / BS / ES / NS metrics over `entries` given |E| x C probabilities.
std::vector<SubsetMetrics> evaluate_subsets(const PpiGraph& graph, const Partition& split,
                                            const std::vector<std::size_t>& entries, const Tensor& probabilities);

struct PredictionRow {
  std::size_t entry = 0;
  std::string id_a, id_b;
  std::string split;   // train / val / test
  std::string subset;  // BS / ES / NS
  LabelVector labels{};
  std::array<double, kNumInteractionTypes> probs{};
};

/// CSV: entry,id_a,id_b,split,subset,y1..y7,p1..p7
std::vector<PredictionRow> prediction_rows(const PpiGraph& graph, const Partition& split, const Tensor& probabilities);
void write_predictions_csv(const std::filesystem::path& path, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

/// Metrics over the rows whose subset matches (or all rows for "ALL").
SubsetMetrics evaluate_prediction_rows(const std::vector<PredictionRow>& rows, const std::string& subset);

}  // namespace mcppi
