#include "mcppi/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "mcppi/errors.hpp"
#include "mcppi/optim.hpp"

namespace mcppi {

using nlohmann::json;

namespace {

constexpr char kEmbeddingMagic[8] = {'M', 'C', 'P', 'P', 'I', 'E', 'M', 'B'};

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ULL;
    }
  }
  void text(const std::string& s) { bytes(s.data(), s.size()); }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
};

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::vector<std::size_t> sample_residues(std::size_t m, double ratio, std::mt19937_64& rng) {
  const auto count =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m))), 1, m);
  std::vector<std::size_t> all(m), out;
  std::iota(all.begin(), all.end(), 0);
  std::sample(all.begin(), all.end(), std::back_inserter(out), static_cast<std::ptrdiff_t>(count), rng);
  return out;
}

// Rows of `base`, with the listed rows swapped for the single row `filler`.
Tensor replace_rows(const Tensor& base, const Tensor& filler, const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> idx(base.rows());
  std::iota(idx.begin(), idx.end(), 0);
  for (auto r : rows) idx[r] = base.rows();
  return gather_rows(concat_rows(base, filler), idx);
}

Tensor mean_squared_rows(const Tensor& a, const Tensor& b) {
  const Tensor d = sub(a, b);
  return scale(sum(mul(d, d)), 1.0 / static_cast<double>(a.rows()));
}

double flatten_f1(const Tensor& probs, const Tensor& labels) { return micro_f1(probs.values(), labels.values()); }

}  // namespace

std::vector<PreparedProtein> prepare_proteins(const std::vector<Protein>& proteins, const GraphParams& params) {
  std::vector<PreparedProtein> out;
  out.reserve(proteins.size());
  for (const auto& p : proteins) {
    p.validate();
    out.push_back({p.id, p.features(), MessageIndex::from_graph(build_hetero_graph(p, params))});
  }
  return out;
}

ProteinModel::ProteinModel(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  encoder_ = HgnnStack("encoder", StackDirection::kEncoder, kNumAminoAcids, cfg.hidden, cfg.layers, rng);
  codebook_ = Codebook("codebook", cfg.codebook_size, cfg.hidden, rng);
  decoder_ = HgnnStack("decoder", StackDirection::kDecoder, kNumAminoAcids, cfg.hidden, cfg.layers, rng);
}

ParameterList ProteinModel::parameters() {
  ParameterList out;
  encoder_.collect(out);
  codebook_.collect(out);
  decoder_.collect(out);
  return out;
}

StateDict ProteinModel::state() {
  StateDict out;
  export_parameters(parameters(), out);
  encoder_.export_buffers(out);
  decoder_.export_buffers(out);
  return out;
}

void ProteinModel::load_state(const StateDict& state) {
  try {
    import_parameters(parameters(), state);
    encoder_.import_buffers(state);
    decoder_.import_buffers(state);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("checkpoint does not match the model: ") + e.what());
  }
}

Tensor ProteinModel::encode(const PreparedProtein& p, Mode mode) { return encoder_.forward(p.index, p.features, mode); }

void save_checkpoint(const std::filesystem::path& dir, ProteinModel& model, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  save_state_json(dir / "model.json", model.state());
  std::ofstream os(dir / "config.toml");
  if (!os) throw InputError("cannot write " + (dir / "config.toml").string());
  os << config_to_toml({cfg, {}});
}

ProteinModel load_checkpoint(const std::filesystem::path& dir, RunConfig& cfg) {
  if (!std::filesystem::exists(dir / "model.json")) throw ConfigError("no checkpoint at " + dir.string());
  cfg = load_config_toml(dir / "config.toml").run;
  ProteinModel model(cfg, cfg.seed);
  model.load_state(load_state_json(dir / "model.json"));
  return model;
}

PretrainLoss pretrain_objective(ProteinModel& model, const PreparedProtein& p, const RunConfig& cfg, Mode mode,
                                std::mt19937_64& rng) {
  HgnnStack& decoder = model.decoder();
  Codebook& cb = model.codebook();
  const Tensor& x = p.features;
  const Tensor h = model.encode(p, mode);
  PretrainLoss out;
  out.mcm = Tensor::scalar(0.0);

  if (cfg.ablation == Ablation::kNoVq) {
    const Tensor x_hat = decoder.forward(p.index, h, mode);
    out.vq.reconstruction = mean_squared_rows(x, x_hat);
    out.vq.codebook = Tensor::scalar(0.0);
    out.vq.commitment = Tensor::scalar(0.0);
    out.vq.total = out.vq.reconstruction;
    out.total = pretrain_loss(out.vq.total, out.mcm, 0.0);
    return out;
  }

  const QuantizationResult q = quantize(h, cb);
  out.codes = q.codes;
  const Tensor x_hat = decoder.forward(p.index, q.straight_through, mode);
  out.vq = vq_loss(x, x_hat, h, q, cfg.beta);

  std::vector<std::size_t> masked;
  Tensor x_tilde;
  switch (cfg.ablation) {
    case Ablation::kNone: {
      const MaskPlan plan = sample_mask(cb.size(), cfg.mask_ratio, rng);
      MaskedLookup lookup = masked_lookup(q.codes, cb, plan);
      masked = std::move(lookup.masked_nodes);
      if (!masked.empty()) x_tilde = decoder.forward(p.index, lookup.rows, mode);
      break;
    }
    case Ablation::kMhm: {
      masked = sample_residues(x.rows(), cfg.mask_ratio, rng);
      x_tilde = decoder.forward(p.index, replace_rows(q.straight_through, cb.mask_vector().tensor(), masked), mode);
      break;
    }
    case Ablation::kMlm: {
      masked = sample_residues(x.rows(), cfg.mask_ratio, rng);
      const Tensor x_masked = replace_rows(x, Tensor::zeros({1, x.cols()}), masked);
      const Tensor h_masked = model.encoder().forward(p.index, x_masked, mode);
      x_tilde = decoder.forward(p.index, quantize(h_masked, cb).straight_through, mode);
      break;
    }
    default: break;
  }
  // With no masked residue the term is zero; skipping the call keeps the
  // per-step log quiet.
  if (!masked.empty()) out.mcm = mcm_loss(x, x_tilde, masked, cfg.gamma);
  const double eta = cfg.ablation == Ablation::kNoMask ? 0.0 : cfg.eta;
  out.total = pretrain_loss(out.vq.total, out.mcm, eta);
  return out;
}

std::vector<PretrainEpochLog> pretrain(ProteinModel& model, const std::vector<PreparedProtein>& proteins,
                                       const RunConfig& cfg, const PretrainOptions& options) {
  cfg.validate();
  if (proteins.empty()) throw InputError("pretraining needs at least one protein");
  Adam adam(model.parameters(), {.lr = cfg.effective_pretrain_lr(), .weight_decay = cfg.weight_decay});
  std::mt19937_64 rng(mix(cfg.seed, 11));
  std::vector<std::size_t> order(proteins.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<PretrainEpochLog> log;
  for (std::size_t epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    const StateDict last_good = model.state();
    std::shuffle(order.begin(), order.end(), rng);
    PretrainEpochLog entry;
    entry.epoch = epoch;
    std::vector<std::size_t> usage(model.codebook().size(), 0);
    for (auto i : order) {
      PretrainLoss loss;
      try {
        loss = pretrain_objective(model, proteins[i], cfg, Mode::kTrain, rng);
      } catch (const NumericError& e) {
        model.load_state(last_good);
        throw NumericError("pretraining aborted in epoch " + std::to_string(epoch) + " on protein '" +
                           proteins[i].id + "', parameters restored to the epoch start (" + e.what() + ")");
      }
      adam.zero_grad();
      loss.total.backward();
      adam.step();
      entry.total += loss.total.item();
      entry.reconstruction += loss.vq.reconstruction.item();
      entry.codebook += loss.vq.codebook.item();
      entry.commitment += loss.vq.commitment.item();
      entry.mcm += loss.mcm.item();
      for (auto c : loss.codes) ++usage[c];
    }
    const double n = static_cast<double>(proteins.size());
    entry.total /= n;
    entry.reconstruction /= n;
    entry.codebook /= n;
    entry.commitment /= n;
    entry.mcm /= n;
    entry.usage_entropy = usage_entropy(usage);
    entry.used_codes = static_cast<std::size_t>(std::count_if(usage.begin(), usage.end(), [](auto u) { return u > 0; }));
    spdlog::info("pretrain epoch {}/{}: loss {:.5f} (recon {:.5f}, mcm {:.5f}), {} codes used", epoch,
                 cfg.pretrain_epochs, entry.total, entry.reconstruction, entry.mcm, entry.used_codes);
    if (options.on_epoch) options.on_epoch(entry);
    log.push_back(entry);
  }
  return log;
}

double evaluate_pretrain_loss(ProteinModel& model, const std::vector<PreparedProtein>& proteins, const RunConfig& cfg) {
  if (proteins.empty()) throw InputError("no proteins to evaluate");
  std::mt19937_64 rng(mix(cfg.seed, 12));
  double total = 0.0;
  for (const auto& p : proteins) total += pretrain_objective(model, p, cfg, Mode::kEval, rng).total.item();
  return total / static_cast<double>(proteins.size());
}

void write_pretrain_log_csv(const std::filesystem::path& path, const std::vector<PretrainEpochLog>& log) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "epoch,total,reconstruction,codebook,commitment,mcm,usage_entropy,used_codes\n" << std::setprecision(17);
  for (const auto& e : log) {
    os << e.epoch << ',' << e.total << ',' << e.reconstruction << ',' << e.codebook << ',' << e.commitment << ','
       << e.mcm << ',' << e.usage_entropy << ',' << e.used_codes << '\n';
  }
}

std::vector<std::vector<std::size_t>> assign_codes(ProteinModel& model, const std::vector<PreparedProtein>& proteins) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(proteins.size());
  for (const auto& p : proteins) out.push_back(nearest_codes(model.encode(p, Mode::kEval), model.codebook()));
  return out;
}

EmbeddingTable embed_all(ProteinModel& model, const std::vector<PreparedProtein>& proteins, const RunConfig& cfg,
                         std::size_t workers) {
  const std::size_t width = 2 * model.hidden();
  EmbeddingTable table;
  std::vector<double> values(proteins.size() * width);
  for (const auto& p : proteins) {
    if (p.features.cols() != model.encoder().in_features())
      throw ConfigError("protein '" + p.id + "' features do not match the checkpoint input width");
    table.ids.push_back(p.id);
  }

  auto embed_one = [&](std::size_t i) {
    const Tensor h = model.encode(proteins[i], Mode::kEval);
    const Tensor codes = cfg.ablation == Ablation::kNoVq ? h : quantize(h, model.codebook()).quantized;
    const Tensor row = readout(codes, h);
    std::copy(row.values().begin(), row.values().end(), values.begin() + static_cast<std::ptrdiff_t>(i * width));
  };

  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, proteins.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < proteins.size(); ++i) embed_one(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < proteins.size(); i += workers) embed_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  table.matrix = Tensor::from({proteins.size(), width}, std::move(values));
  return table;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, const std::string& cache_key) {
  if (table.ids.size() != table.matrix.rows()) throw DimensionError("embedding ids and rows differ");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  const std::uint64_t n = table.matrix.rows(), d = table.matrix.cols();
  os.write(kEmbeddingMagic, sizeof kEmbeddingMagic);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&d), sizeof d);
  os.write(reinterpret_cast<const char*>(table.matrix.values().data()),
           static_cast<std::streamsize>(table.matrix.size() * sizeof(double)));

  std::ofstream meta(path.string() + ".meta.json");
  if (!meta) throw InputError("cannot write " + path.string() + ".meta.json");
  meta << json{{"ids", table.ids}, {"cache_key", cache_key}}.dump() << '\n';
}

namespace {

json read_meta(const std::filesystem::path& path) {
  std::ifstream is(path.string() + ".meta.json");
  if (!is) throw InputError("missing " + path.string() + ".meta.json");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ".meta.json: " + e.what());
  }
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read " + path.string());
  char magic[8];
  std::uint64_t n = 0, d = 0;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&d), sizeof d);
  if (!is || std::memcmp(magic, kEmbeddingMagic, sizeof magic) != 0)
    throw ParseError(path.string() + " is not an embedding file");
  std::vector<double> values(n * d);
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw ParseError(path.string() + " is truncated");

  EmbeddingTable table;
  table.ids = read_meta(path).at("ids").get<std::vector<std::string>>();
  if (table.ids.size() != n) throw ValidationError(path.string() + ": id count does not match row count");
  table.matrix = Tensor::from({n, d}, std::move(values));
  return table;
}

std::string embedding_cache_key(ProteinModel& model, const std::vector<Protein>& proteins, const RunConfig& cfg) {
  Fnv1a h;
  h.value(static_cast<std::uint64_t>(state_fingerprint(model.state())));
  h.value(cfg.seq_window);
  h.value(cfg.radius);
  h.value(cfg.knn);
  h.value(static_cast<int>(cfg.ablation));
  for (const auto& p : proteins) {
    h.text(p.id);
    h.bytes(p.sequence.data(), p.sequence.size());
    h.bytes(p.coords.data(), p.coords.size() * sizeof(Vec3));
  }
  return hex(h.state);
}

EmbeddingTable embed_all_cached(ProteinModel& model, const std::vector<Protein>& proteins, const RunConfig& cfg,
                                const std::filesystem::path& cache, bool* hit) {
  const std::string key = embedding_cache_key(model, proteins, cfg);
  if (std::filesystem::exists(cache) && std::filesystem::exists(cache.string() + ".meta.json")) {
    try {
      if (read_meta(cache).value("cache_key", std::string{}) == key) {
        if (hit) *hit = true;
        return load_embeddings(cache);
      }
    } catch (const Error& e) {
      spdlog::warn("ignoring unreadable embedding cache {}: {}", cache.string(), e.what());
    }
  }
  if (hit) *hit = false;
  EmbeddingTable table = embed_all(model, prepare_proteins(proteins, cfg.graph_params()), cfg);
  save_embeddings(cache, table, key);
  return table;
}

Tensor align_embeddings(const EmbeddingTable& table, const PpiGraph& graph) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < table.ids.size(); ++i) row_of.emplace(table.ids[i], i);
  std::vector<std::size_t> rows;
  rows.reserve(graph.n_proteins());
  for (const auto& id : graph.protein_ids) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw InputError("no embedding for protein '" + id + "'");
    rows.push_back(it->second);
  }
  return gather_rows(table.matrix, rows).detach();
}

Tensor predict_probabilities(PpiModel& model, const PpiGraph& graph, const Tensor& features,
                             const std::vector<std::size_t>& entries) {
  const PpiAdjacency adj = PpiAdjacency::from_edges(graph.n_proteins(), graph.edges);
  std::vector<std::size_t> a, b;
  for (auto e : entries) {
    a.push_back(graph.edges.at(e).a);
    b.push_back(graph.edges.at(e).b);
  }
  const Tensor z = model.encode(adj, features);
  return sigmoid(model.logits(z, a, b)).detach();
}

std::vector<SubsetMetrics> evaluate_subsets(const PpiGraph& graph, const Partition& split,
                                            const std::vector<std::size_t>& entries, const Tensor& probabilities) {
  if (probabilities.rows() != graph.edges.size()) throw DimensionError("probabilities must cover every entry");
  const auto seen = train_proteins(graph, split);
  std::vector<SubsetMetrics> out;
  for (const std::string name : {"ALL", "BS", "ES", "NS"}) {
    std::vector<double> p, y;
    SubsetMetrics m;
    m.subset = name;
    for (auto e : entries) {
      if (name != "ALL" && subset_name(subset_label(graph.edges[e], seen)) != name) continue;
      ++m.entries;
      for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
        p.push_back(probabilities.at(e, c));
        y.push_back(graph.edges[e].labels[c]);
      }
    }
    m.micro_f1 = micro_f1(p, y);
    try {
      m.aupr = aupr(p, y);
    } catch (const MetricError&) {
      m.aupr = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(m);
  }
  return out;
}

PpiTrainResult train_ppi(const PpiGraph& graph, const Partition& split, const RunConfig& cfg,
                         const PpiTrainOptions& options) {
  cfg.validate();
  if (split.train.empty()) throw PartitionError("train split is empty");
  if (graph.node_features.rows() != graph.n_proteins())
    throw DimensionError("node features have " + std::to_string(graph.node_features.rows()) + " rows for " +
                         std::to_string(graph.n_proteins()) + " proteins");

  std::mt19937_64 rng(mix(cfg.seed, 21));
  PpiTrainResult result;
  result.model = PpiModel(graph.node_features.cols(), cfg.ppi_hidden, cfg.ppi_layers, rng);
  const ParameterList params = result.model.parameters();
  Adam adam(params, {.lr = cfg.lr, .weight_decay = cfg.weight_decay});

  const PpiAdjacency adj = PpiAdjacency::from_edges(graph.n_proteins(), graph.edges);
  std::vector<std::size_t> train_a, train_b;
  for (auto e : split.train) {
    train_a.push_back(graph.edges.at(e).a);
    train_b.push_back(graph.edges.at(e).b);
  }
  const Tensor train_labels = graph.label_matrix(split.train);
  const Tensor val_labels = graph.label_matrix(split.val);

  Tensor features = graph.node_features.detach();
  StateDict best;
  result.best_val_micro_f1 = -1.0;
  for (std::size_t epoch = 1; epoch <= cfg.ppi_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (options.refresh_features) features = options.refresh_features().detach();
    const Tensor z = result.model.encode(adj, features);
    const Tensor loss = ppi_bce_loss(result.model.logits(z, train_a, train_b), train_labels);
    if (!std::isfinite(loss.item())) throw NumericError("PPI loss became non-finite in epoch " + std::to_string(epoch));
    adam.zero_grad();
    loss.backward();
    adam.step();

    PpiEpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss.item();
    if (!split.val.empty()) {
      entry.val_micro_f1 = flatten_f1(predict_probabilities(result.model, graph, features, split.val), val_labels);
    }
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (split.val.empty() || entry.val_micro_f1 > result.best_val_micro_f1) {
      result.best_val_micro_f1 = entry.val_micro_f1;
      result.best_epoch = epoch;
      best.clear();
      export_parameters(params, best);
    }
    if (options.on_epoch) options.on_epoch(entry);
    result.history.push_back(entry);
  }
  if (!best.empty()) import_parameters(params, best);

  std::vector<std::size_t> all(graph.edges.size());
  std::iota(all.begin(), all.end(), 0);
  result.probabilities = predict_probabilities(result.model, graph, features, all);
  result.test_report = evaluate_subsets(graph, split, split.test, result.probabilities);
  spdlog::info("train-ppi: best epoch {} (val micro-F1 {:.4f}), test micro-F1 {:.4f}", result.best_epoch,
               result.best_val_micro_f1, result.test_report.front().micro_f1);
  return result;
}

std::vector<PredictionRow> prediction_rows(const PpiGraph& graph, const Partition& split, const Tensor& probabilities) {
  if (probabilities.rows() != graph.edges.size()) throw DimensionError("probabilities must cover every entry");
  std::vector<std::string> where(graph.edges.size(), "");
  for (auto e : split.train) where.at(e) = "train";
  for (auto e : split.val) where.at(e) = "val";
  for (auto e : split.test) where.at(e) = "test";
  const auto seen = train_proteins(graph, split);
  std::vector<PredictionRow> rows;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    PredictionRow r;
    r.entry = e;
    r.id_a = graph.protein_ids.at(edge.a);
    r.id_b = graph.protein_ids.at(edge.b);
    r.split = where[e];
    r.subset = subset_name(subset_label(edge, seen));
    r.labels = edge.labels;
    for (std::size_t c = 0; c < kNumInteractionTypes; ++c) r.probs[c] = probabilities.at(e, c);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_predictions_csv(const std::filesystem::path& path, const std::vector<PredictionRow>& rows) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "entry,id_a,id_b,split,subset";
  for (std::size_t c = 1; c <= kNumInteractionTypes; ++c) os << ",y" << c;
  for (std::size_t c = 1; c <= kNumInteractionTypes; ++c) os << ",p" << c;
  os << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.entry << ',' << r.id_a << ',' << r.id_b << ',' << r.split << ',' << r.subset;
    for (auto y : r.labels) os << ',' << static_cast<int>(y);
    for (auto p : r.probs) os << ',' << p;
    os << '\n';
  }
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  std::vector<PredictionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5 + 2 * kNumInteractionTypes)
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                       std::to_string(5 + 2 * kNumInteractionTypes) + " columns");
    PredictionRow r;
    try {
      r.entry = std::stoull(cells[0]);
      r.id_a = cells[1];
      r.id_b = cells[2];
      r.split = cells[3];
      r.subset = cells[4];
      for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
        r.labels[c] = static_cast<std::uint8_t>(std::stoi(cells[5 + c]));
        r.probs[c] = parse_csv_number(cells[5 + kNumInteractionTypes + c]);
      }
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": bad number");
    } catch (const ParseError& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

SubsetMetrics evaluate_prediction_rows(const std::vector<PredictionRow>& rows, const std::string& subset) {
  SubsetMetrics m;
  m.subset = subset;
  std::vector<double> p, y;
  for (const auto& r : rows) {
    if (subset != "ALL" && r.subset != subset) continue;
    ++m.entries;
    for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
      p.push_back(r.probs[c]);
      y.push_back(r.labels[c]);
    }
  }
  m.micro_f1 = micro_f1(p, y);
  try {
    m.aupr = aupr(p, y);
  } catch (const MetricError&) {
    m.aupr = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

}  // namespace mcppi
