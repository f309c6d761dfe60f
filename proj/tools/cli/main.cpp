// mcppi: command-line driver for generation, pretraining, embedding,
// partitioning, PPI training, evaluation and robustness sweeps.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "mcppi/config.hpp"
#include "mcppi/errors.hpp"
#include "mcppi/metrics.hpp"
#include "mcppi/synth.hpp"
#include "mcppi/trainer.hpp"

namespace fs = std::filesystem;
using namespace mcppi;

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

ConfigFile config_or_default(const std::optional<fs::path>& path, bool desk) {
  if (path) return load_config_toml(*path);
  ConfigFile cfg;
  if (desk) cfg.run = RunConfig::desk();
  return cfg;
}

// Shortest round-trip form, always with a decimal point ("1.0", "0.9375").
std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// ---------------------------------------------------------------- gen
struct GenArgs {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
};

void run_gen(const GenArgs& a) {
  ConfigFile cfg = config_or_default(a.config, true);
  SynthConfig& s = cfg.synth;
  if (a.seed) s.seed = *a.seed;
  PlantedConfig planted;
  planted.length = s.length;
  const PlantedDataset data = gen_planted_microenv_dataset(s.n_classes, s.n_proteins, s.seed, planted);
  const SyntheticPpi ppi = gen_ppi_graph(data, s.n_edges, s.seed, {.trait_dim = s.trait_dim, .homophily = s.homophily});

  fs::create_directories(a.out);
  save_proteins(a.out / "proteins.jsonl", data.proteins);
  save_ppi_edges(a.out / "ppi.csv", ppi.graph);
  {
    auto os = open_out(a.out / "residue_classes.csv");
    os << "id,residue,class\n";
    for (std::size_t i = 0; i < data.proteins.size(); ++i)
      for (std::size_t m = 0; m < data.residue_classes[i].size(); ++m)
        os << data.proteins[i].id << ',' << m << ',' << data.residue_classes[i][m] << '\n';
  }
  {
    auto os = open_out(a.out / "traits.csv");
    os << "id";
    for (std::size_t r = 0; r < s.trait_dim; ++r) os << ",t" << r + 1;
    os << '\n';
    for (std::size_t i = 0; i < ppi.traits.size(); ++i) {
      os << ppi.graph.protein_ids[i];
      for (double t : ppi.traits[i]) os << ',' << t;
      os << '\n';
    }
  }
  { open_out(a.out / "config.toml") << config_to_toml(cfg); }
  spdlog::info("gen: {} proteins, {} PPI entries -> {}", data.proteins.size(), ppi.graph.edges.size(), a.out.string());
}

// ----------------------------------------------------------- pretrain
struct PretrainArgs {
  fs::path proteins;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};

void run_pretrain(const PretrainArgs& a) {
  RunConfig cfg = config_or_default(a.config, false).run;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.pretrain_epochs = *a.epochs;
  cfg.validate();
  const auto proteins = load_proteins(a.proteins);
  const auto prepared = prepare_proteins(proteins, cfg.graph_params());
  ProteinModel model(cfg, cfg.seed);
  const auto log = pretrain(model, prepared, cfg);
  save_checkpoint(a.out, model, cfg);
  write_pretrain_log_csv(a.out / "pretrain_log.csv", log);
  spdlog::info("pretrain: checkpoint written to {}", a.out.string());
}

// -------------------------------------------------------------- embed
struct EmbedArgs {
  fs::path proteins;
  fs::path ckpt;
  fs::path out;
  std::optional<fs::path> csv;
};

void run_embed(const EmbedArgs& a) {
  RunConfig cfg;
  ProteinModel model = load_checkpoint(a.ckpt, cfg);
  const auto proteins = load_proteins(a.proteins);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  bool hit = false;
  const EmbeddingTable table = embed_all_cached(model, proteins, cfg, a.out, &hit);
  spdlog::info("embed: {} x {} ({})", table.matrix.rows(), table.matrix.cols(), hit ? "cache hit" : "computed");
  if (a.csv) {
    auto os = open_out(*a.csv);
    os << "id";
    for (std::size_t c = 0; c < table.matrix.cols(); ++c) os << ",x" << c + 1;
    os << '\n';
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
      os << table.ids[i];
      for (std::size_t c = 0; c < table.matrix.cols(); ++c) os << ',' << table.matrix.at(i, c);
      os << '\n';
    }
  }
}

// ---------------------------------------------------------- partition
struct PartitionArgs {
  fs::path edges;
  std::string scheme = "random";
  std::uint64_t seed = 0;
  fs::path out;
  double val = 0.2;
  double test = 0.2;
};

void run_partition(const PartitionArgs& a) {
  const PpiGraph g = load_ppi_edges(a.edges);
  const SplitRatios ratios{1.0 - a.val - a.test, a.val, a.test};
  const Partition p = partition(g, parse_scheme(a.scheme), ratios, a.seed);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  save_partition(a.out, p);
  const auto c = count_subsets(g, p, p.test);
  spdlog::info("partition: train {}, val {}, test {} (BS {}, ES {}, NS {})", p.train.size(), p.val.size(),
               p.test.size(), c.bs, c.es, c.ns);
}

// ---------------------------------------------------------- train-ppi
struct TrainArgs {
  fs::path emb;
  fs::path edges;
  fs::path split;
  fs::path out;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string run_id;
};

void run_train_ppi(const TrainArgs& a) {
  RunConfig cfg = config_or_default(a.config, false).run;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.ppi_epochs = *a.epochs;
  cfg.validate();
  PpiGraph graph = load_ppi_edges(a.edges);
  graph.node_features = align_embeddings(load_embeddings(a.emb), graph);
  const Partition split = load_partition(a.split);
  cfg.scheme = split.scheme;

  PpiTrainResult result = train_ppi(graph, split, cfg);
  fs::create_directories(a.out);

  StateDict state;
  export_parameters(result.model.parameters(), state);
  save_state_json(a.out / "model.json", state);
  { open_out(a.out / "config.toml") << config_to_toml({cfg, {}}); }
  {
    auto os = open_out(a.out / "history.csv");
    os << "epoch,train_loss,val_micro_f1,seconds\n";
    for (const auto& h : result.history)
      os << h.epoch << ',' << h.train_loss << ',' << h.val_micro_f1 << ',' << h.seconds << '\n';
  }
  write_predictions_csv(a.out / "predictions.csv", prediction_rows(graph, split, result.probabilities));

  const std::string run_id = a.run_id.empty() ? a.out.filename().string() : a.run_id;
  std::vector<MetricRecord> records;
  records.push_back({run_id, scheme_name(split.scheme), "VAL", "micro_f1", result.best_val_micro_f1});
  records.push_back({run_id, scheme_name(split.scheme), "VAL", "best_epoch", static_cast<double>(result.best_epoch)});
  for (const auto& m : result.test_report) {
    records.push_back({run_id, scheme_name(split.scheme), m.subset, "entries", static_cast<double>(m.entries)});
    records.push_back({run_id, scheme_name(split.scheme), m.subset, "micro_f1", m.micro_f1});
    records.push_back({run_id, scheme_name(split.scheme), m.subset, "aupr", m.aupr});
  }
  write_metrics_csv(a.out / "metrics.csv", records);
}

// --------------------------------------------------------------- eval
struct EvalArgs {
  fs::path run;
  std::string subset = "all";
  std::string split = "test";
};

void run_eval(const EvalArgs& a) {
  const std::string subset = upper(a.subset);
  if (subset != "ALL" && subset != "BS" && subset != "ES" && subset != "NS")
    throw ConfigError("unknown subset '" + a.subset + "' (expected all|bs|es|ns)");
  if (a.split != "train" && a.split != "val" && a.split != "test" && a.split != "all")
    throw ConfigError("unknown split '" + a.split + "' (expected train|val|test|all)");
  std::vector<PredictionRow> rows;
  for (auto& r : read_predictions_csv(a.run / "predictions.csv"))
    if (a.split == "all" || r.split == a.split) rows.push_back(std::move(r));
  const SubsetMetrics m = evaluate_prediction_rows(rows, subset);

  std::cout << "split=" << a.split << " subset=" << subset << " entries=" << m.entries
            << " micro_f1=" << number(m.micro_f1) << " aupr=" << number(m.aupr) << '\n';
  const std::string run_id = a.run.filename().empty() ? a.run.parent_path().filename().string()
                                                      : a.run.filename().string();
  write_metrics_csv(a.run / "eval.csv",
                    {{run_id, a.split, subset, "entries", static_cast<double>(m.entries)},
                     {run_id, a.split, subset, "micro_f1", m.micro_f1},
                     {run_id, a.split, subset, "aupr", m.aupr}},
                    true);
}

// ------------------------------------------------------------ perturb
struct PerturbArgs {
  fs::path proteins;
  double rmsd = 0.0;
  std::uint64_t seed = 0;
  fs::path out;
};

void run_perturb(const PerturbArgs& a) {
  auto proteins = load_proteins(a.proteins);
  for (std::size_t i = 0; i < proteins.size(); ++i)
    proteins[i].coords = perturb_to_rmsd(proteins[i].coords, a.rmsd, stream_seed(a.seed, i));
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  save_proteins(a.out, proteins);
  spdlog::info("perturb: {} proteins at RMSD {} -> {}", proteins.size(), a.rmsd, a.out.string());
}

// ----------------------------------------------------- codebook-report
struct ReportArgs {
  fs::path ckpt;
  fs::path proteins;
  fs::path out;
};

void run_codebook_report(const ReportArgs& a) {
  RunConfig cfg;
  ProteinModel model = load_checkpoint(a.ckpt, cfg);
  const auto proteins = load_proteins(a.proteins);
  const auto codes = assign_codes(model, prepare_proteins(proteins, cfg.graph_params()));
  const Codebook& cb = model.codebook();

  std::vector<std::size_t> usage(cb.size(), 0);
  std::vector<std::array<std::size_t, kNumAminoAcids>> composition(cb.size());
  for (auto& row : composition) row.fill(0);
  for (std::size_t i = 0; i < proteins.size(); ++i)
    for (std::size_t m = 0; m < codes[i].size(); ++m) {
      ++usage[codes[i][m]];
      ++composition[codes[i][m]][proteins[i].sequence[m]];
    }

  fs::create_directories(a.out);
  {
    auto os = open_out(a.out / "code_usage.csv");
    os << "code,usage";
    for (std::size_t f = 0; f < cb.width(); ++f) os << ",v" << f + 1;
    os << '\n';
    const auto values = cb.vectors().values();
    for (std::size_t c = 0; c < cb.size(); ++c) {
      os << c << ',' << usage[c];
      for (std::size_t f = 0; f < cb.width(); ++f) os << ',' << values[c * cb.width() + f];
      os << '\n';
    }
  }
  {
    auto os = open_out(a.out / "code_amino_acids.csv");
    os << "code,usage";
    for (char aa : kAminoAcids) os << ',' << aa;
    os << '\n';
    for (std::size_t c = 0; c < cb.size(); ++c) {
      os << c << ',' << usage[c];
      for (std::size_t k = 0; k < kNumAminoAcids; ++k)
        os << ',' << (usage[c] == 0 ? 0.0 : static_cast<double>(composition[c][k]) / static_cast<double>(usage[c]));
      os << '\n';
    }
  }
  spdlog::info("codebook-report: usage entropy {:.4f} nats, {} codes used", usage_entropy(usage),
               std::count_if(usage.begin(), usage.end(), [](auto u) { return u > 0; }));
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kData: return 3;
    case ErrorKind::kNumeric: return 4;
  }
  return 1;
}

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kData: return "data";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

void fail_line(const char* kind, const std::string& message) {
  std::string flat = message;
  for (auto& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "mcppi: error kind=" << kind << " message=\"" << flat << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microenvironment-codebook protein-protein interaction pipeline"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic planted-microenvironment dataset");
  gen_cmd->add_option("--config", gen.config, "TOML config ([synth] table)")->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Overrides synth.seed");

  PretrainArgs pre;
  auto* pre_cmd = app.add_subcommand("pretrain", "Pretrain encoder, codebook and decoder");
  pre_cmd->add_option("--proteins", pre.proteins, "Protein JSONL")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--config", pre.config, "TOML run config")->check(CLI::ExistingFile);
  pre_cmd->add_option("--out", pre.out, "Checkpoint directory")->required();
  pre_cmd->add_option("--seed", pre.seed, "Overrides seed");
  pre_cmd->add_option("--epochs", pre.epochs, "Overrides E_pre");

  EmbedArgs emb;
  auto* emb_cmd = app.add_subcommand("embed", "Embed proteins with a frozen checkpoint");
  emb_cmd->add_option("--proteins", emb.proteins, "Protein JSONL")->required()->check(CLI::ExistingFile);
  emb_cmd->add_option("--ckpt", emb.ckpt, "Checkpoint directory")->required();
  emb_cmd->add_option("--out", emb.out, "Embedding cache file")->required();
  emb_cmd->add_option("--csv", emb.csv, "Also dump embeddings as CSV");

  PartitionArgs part;
  auto* part_cmd = app.add_subcommand("partition", "Split PPI entries into train/val/test");
  part_cmd->add_option("--edges", part.edges, "PPI edge CSV")->required()->check(CLI::ExistingFile);
  part_cmd->add_option("--scheme", part.scheme, "random|bfs|dfs")->check(CLI::IsMember({"random", "bfs", "dfs"}));
  part_cmd->add_option("--seed", part.seed, "Partition seed");
  part_cmd->add_option("--out", part.out, "Partition JSON")->required();
  part_cmd->add_option("--val", part.val, "Validation fraction");
  part_cmd->add_option("--test", part.test, "Test fraction");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-ppi", "Train the GIN PPI model on cached embeddings");
  train_cmd->add_option("--emb", train.emb, "Embedding cache file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--edges", train.edges, "PPI edge CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--split", train.split, "Partition JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Run directory")->required();
  train_cmd->add_option("--config", train.config, "TOML run config")->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", train.seed, "Overrides seed");
  train_cmd->add_option("--epochs", train.epochs, "Overrides E");
  train_cmd->add_option("--run-id", train.run_id, "Identifier written to metrics.csv");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Report metrics from a run's predictions");
  eval_cmd->add_option("--run", ev.run, "Run directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--subset", ev.subset, "all|bs|es|ns");
  eval_cmd->add_option("--split", ev.split, "train|val|test|all");

  PerturbArgs pert;
  auto* pert_cmd = app.add_subcommand("perturb", "Add Gaussian coordinate noise at a target RMSD");
  pert_cmd->add_option("--proteins", pert.proteins, "Protein JSONL")->required()->check(CLI::ExistingFile);
  pert_cmd->add_option("--rmsd", pert.rmsd, "Target RMSD (Angstrom)")->required();
  pert_cmd->add_option("--seed", pert.seed, "Noise seed");
  pert_cmd->add_option("--out", pert.out, "Output JSONL")->required();

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("codebook-report", "Code usage and per-code residue composition");
  rep_cmd->add_option("--ckpt", rep.ckpt, "Checkpoint directory")->required();
  rep_cmd->add_option("--proteins", rep.proteins, "Protein JSONL")->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--out", rep.out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line("config", e.what());
    return 2;
  }

  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);
  try {
    if (*gen_cmd) run_gen(gen);
    else if (*pre_cmd) run_pretrain(pre);
    else if (*emb_cmd) run_embed(emb);
    else if (*part_cmd) run_partition(part);
    else if (*train_cmd) run_train_ppi(train);
    else if (*eval_cmd) run_eval(ev);
    else if (*pert_cmd) run_perturb(pert);
    else if (*rep_cmd) run_codebook_report(rep);
  } catch (const Error& e) {
    fail_line(kind_name(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fail_line("data", e.what());
    return 3;
  }
  return 0;
}
