#include "mcppi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "mcppi/errors.hpp"

namespace mcppi {

namespace {

constexpr int kStepAttempts = 200;
constexpr int kWalkRestarts = 25;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Vec3 v{normal(rng), normal(rng), normal(rng)};
    const double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (n2 > 1e-12) return normalized(v);
  }
}

// Direction at angle `bend` from `d`, rotated by azimuth `phi` around it.
Vec3 bent_direction(const Vec3& d, double bend, double phi) {
  const Vec3 helper = std::abs(d[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 u = normalized(cross(d, helper));
  const Vec3 v = cross(d, u);
  Vec3 out;
  for (int k = 0; k < 3; ++k)
    out[k] = std::cos(bend) * d[k] + std::sin(bend) * (std::cos(phi) * u[k] + std::sin(phi) * v[k]);
  return normalized(out);
}

bool try_walk(std::size_t length, const std::vector<WalkStyle>& styles, std::mt19937_64& rng, std::vector<Vec3>& out) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.assign(1, Vec3{0.0, 0.0, 0.0});
  Vec3 dir = random_unit(rng);
  for (std::size_t m = 1; m < length; ++m) {
    const WalkStyle& style = styles.size() == 1 ? styles[0] : styles[m];
    bool placed = false;
    for (int attempt = 0; attempt < kStepAttempts && !placed; ++attempt) {
      Vec3 next_dir = dir;
      if (m > 1) {
        const double bend = (style.bend_deg + style.jitter_deg * (2.0 * unit(rng) - 1.0)) * kDeg;
        next_dir = bent_direction(dir, bend, 2.0 * std::numbers::pi * unit(rng));
      } else if (attempt > 0) {
        next_dir = random_unit(rng);
      }
      const Vec3& last = out.back();
      const Vec3 cand{last[0] + kBondLength * next_dir[0], last[1] + kBondLength * next_dir[1],
                      last[2] + kBondLength * next_dir[2]};
      bool clear = true;
      for (std::size_t j = 0; j + 1 < out.size() && clear; ++j) clear = distance(cand, out[j]) >= kClearance;
      if (clear) {
        out.push_back(cand);
        dir = next_dir;
        placed = true;
      }
    }
    if (!placed) return false;
  }
  return true;
}

std::size_t draw_length(const LengthRange& len, std::mt19937_64& rng) {
  if (len.min < 3) throw ConfigError("minimum protein length must be >= 3");
  if (len.max < len.min) throw ConfigError("length range is empty");
  return std::uniform_int_distribution<std::size_t>(len.min, len.max)(rng);
}

std::vector<std::uint8_t> draw_residues(std::size_t n, const AminoAcidWeights& w, std::mt19937_64& rng) {
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::vector<std::uint8_t> seq(n);
  for (auto& s : seq) s = static_cast<std::uint8_t>(pick(rng));
  return seq;
}

std::string protein_id(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "P" + digits;
}

}  // namespace

std::vector<Vec3> self_avoiding_walk(std::size_t length, const std::vector<WalkStyle>& styles, std::uint64_t seed) {
  if (length == 0) return {};
  if (styles.empty() || (styles.size() != 1 && styles.size() != length))
    throw ConfigError("walk needs one style or one per residue");
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out;
  for (int restart = 0; restart < kWalkRestarts; ++restart)
    if (try_walk(length, styles, rng, out)) return out;
  throw GenerationError("self-avoiding walk of length " + std::to_string(length) + " failed after " +
                        std::to_string(kWalkRestarts) + " restarts");
}

Protein gen_protein(const std::string& id, const LengthRange& len, std::uint64_t seed) {
  AminoAcidWeights uniform;
  uniform.fill(1.0);
  return gen_protein(id, len, seed, uniform);
}

Protein gen_protein(const std::string& id, const LengthRange& len, std::uint64_t seed, const AminoAcidWeights& weights) {
  std::mt19937_64 rng(seed);
  const std::size_t n = draw_length(len, rng);
  Protein p;
  p.id = id;
  p.sequence = draw_residues(n, weights, rng);
  p.coords = self_avoiding_walk(n, {WalkStyle{}}, mix_seed(seed, 1));
  return p;
}

std::vector<MicroenvTemplate> make_templates(std::size_t n_classes, double dominant_mass) {
  if (n_classes < 1 || n_classes > kNumAminoAcids) throw ConfigError("n_classes must be in [1, 20]");
  const std::size_t stride = std::max<std::size_t>(1, kNumAminoAcids / n_classes);
  std::vector<MicroenvTemplate> out(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& t = out[c];
    t.aa_weights.fill((1.0 - dominant_mass) / static_cast<double>(kNumAminoAcids));
    for (std::size_t j = 0; j < 2; ++j) t.aa_weights[(c * stride + j) % kNumAminoAcids] += dominant_mass / 2.0;
    t.style.bend_deg = n_classes == 1 ? 70.0 : 35.0 + 75.0 * static_cast<double>(c) / static_cast<double>(n_classes - 1);
  }
  return out;
}

std::vector<std::vector<double>> PlantedDataset::class_histograms() const {
  std::vector<std::vector<double>> out;
  out.reserve(residue_classes.size());
  for (const auto& labels : residue_classes) {
    std::vector<double> h(n_classes, 0.0);
    for (auto c : labels) h[c] += 1.0;
    for (auto& v : h) v /= static_cast<double>(std::max<std::size_t>(1, labels.size()));
    out.push_back(std::move(h));
  }
  return out;
}

PlantedDataset gen_planted_microenv_dataset(std::size_t n_classes, std::size_t n_proteins, std::uint64_t seed,
                                            const PlantedConfig& config) {
  if (config.segment_min < 1 || config.segment_max < config.segment_min) throw ConfigError("bad segment range");
  if (!(config.dominant_mass >= 0.0 && config.dominant_mass <= 1.0)) throw ConfigError("dominant_mass outside [0, 1]");
  if (!(config.mixture_concentration > 0.0)) throw ConfigError("mixture_concentration must be > 0");

  PlantedDataset data;
  data.n_classes = n_classes;
  data.templates = make_templates(n_classes, config.dominant_mass);

  for (std::size_t i = 0; i < n_proteins; ++i) {
    std::mt19937_64 rng(mix_seed(seed, 2 * i));
    const std::size_t n = draw_length(config.length, rng);

    std::gamma_distribution<double> gamma(config.mixture_concentration, 1.0);
    std::vector<double> mixture(n_classes);
    for (auto& m : mixture) m = gamma(rng);
    if (std::accumulate(mixture.begin(), mixture.end(), 0.0) <= 0.0) std::fill(mixture.begin(), mixture.end(), 1.0);
    std::discrete_distribution<std::size_t> pick_class(mixture.begin(), mixture.end());
    std::uniform_int_distribution<std::size_t> seg_len(config.segment_min, config.segment_max);

    std::vector<std::size_t> labels;
    labels.reserve(n);
    while (labels.size() < n) {
      const std::size_t c = pick_class(rng);
      const std::size_t len = std::min(seg_len(rng), n - labels.size());
      labels.insert(labels.end(), len, c);
    }

    Protein p;
    p.id = protein_id(i);
    p.sequence.resize(n);
    std::vector<WalkStyle> styles(n);
    for (std::size_t m = 0; m < n; ++m) {
      const auto& t = data.templates[labels[m]];
      std::discrete_distribution<int> pick_aa(t.aa_weights.begin(), t.aa_weights.end());
      p.sequence[m] = static_cast<std::uint8_t>(pick_aa(rng));
      styles[m] = t.style;
    }
    p.coords = self_avoiding_walk(n, styles, mix_seed(seed, 2 * i + 1));
    data.proteins.push_back(std::move(p));
    data.residue_classes.push_back(std::move(labels));
  }
  return data;
}

std::vector<double> pair_trait_features(const std::vector<double>& ta, const std::vector<double>& tb) {
  if (ta.size() != tb.size()) throw DimensionError("trait vectors differ in length");
  std::vector<double> out;
  for (std::size_t i = 0; i < ta.size(); ++i)
    for (std::size_t j = i; j < ta.size(); ++j) out.push_back(0.5 * (ta[i] * tb[j] + tb[i] * ta[j]));
  out.push_back(1.0);
  return out;
}

SyntheticPpi gen_ppi_graph(const PlantedDataset& data, std::size_t n_edges, std::uint64_t rule_seed,
                           const PpiRuleConfig& config) {
  const std::size_t n = data.proteins.size();
  const std::size_t total_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  if (n_edges > total_pairs) throw ConfigError("n_edges exceeds the number of distinct protein pairs");
  if (config.trait_dim < 1) throw ConfigError("trait_dim must be >= 1");

  SyntheticPpi out;
  for (const auto& p : data.proteins) out.graph.protein_ids.push_back(p.id);

  std::mt19937_64 rule_rng(mix_seed(rule_seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t k = config.trait_dim;
  std::vector<std::vector<double>> projection(k, std::vector<double>(data.n_classes));
  for (auto& row : projection)
    for (auto& v : row) v = normal(rule_rng);
  std::array<std::vector<double>, kNumInteractionTypes> rules;
  for (auto& a : rules) {
    a.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j) a[i * k + j] = a[j * k + i] = normal(rule_rng);
  }

  const auto hist = data.class_histograms();
  const double centre = data.n_classes == 0 ? 0.0 : 1.0 / static_cast<double>(data.n_classes);
  for (const auto& h : hist) {
    std::vector<double> t(k, 0.0);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < h.size(); ++c) t[r] += projection[r][c] * (h[c] - centre);
    out.traits.push_back(std::move(t));
  }

  // Weighted sampling without replacement (exponential keys), favouring
  // pairs with similar traits, under a soft per-protein degree cap.
  std::mt19937_64 pair_rng(mix_seed(rule_seed, 1));
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  std::vector<double> gap;
  candidates.reserve(total_pairs);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      candidates.emplace_back(a, b);
      double d = 0.0;
      for (std::size_t r = 0; r < k; ++r) d += (out.traits[a][r] - out.traits[b][r]) * (out.traits[a][r] - out.traits[b][r]);
      gap.push_back(d);
    }
  std::vector<double> sorted_gap = gap;
  double median_gap = 1.0;
  if (!sorted_gap.empty()) {
    auto mid = sorted_gap.begin() + static_cast<std::ptrdiff_t>(sorted_gap.size() / 2);
    std::nth_element(sorted_gap.begin(), mid, sorted_gap.end());
    if (*mid > 0.0) median_gap = *mid;
  }
  std::exponential_distribution<double> expo(1.0);
  std::vector<std::pair<double, std::size_t>> keyed(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    // Smaller key wins: Exp(1) / w with w = exp(-homophily * gap / median).
    keyed[i] = {std::log(expo(pair_rng)) + config.homophily * gap[i] / median_gap, i};
  }
  std::sort(keyed.begin(), keyed.end());

  const std::size_t cap = n == 0 ? 0 : (2 * n_edges + n - 1) / n + config.degree_slack;
  std::vector<std::size_t> degree(n, 0);
  std::vector<bool> taken(candidates.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int pass = 0; pass < 2 && pairs.size() < n_edges; ++pass) {
    for (const auto& [key, i] : keyed) {
      if (pairs.size() == n_edges) break;
      if (taken[i]) continue;
      const auto [a, b] = candidates[i];
      if (pass == 0 && (degree[a] >= cap || degree[b] >= cap)) continue;
      taken[i] = true;
      ++degree[a];
      ++degree[b];
      pairs.push_back(candidates[i]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  if (pairs.empty()) return out;

  auto score = [&](std::size_t c, std::size_t a, std::size_t b) {
    const auto& ta = out.traits[a];
    const auto& tb = out.traits[b];
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) s += ta[i] * rules[c][i * k + j] * tb[j];
    return s;
  };

  std::vector<std::array<double, kNumInteractionTypes>> scores(pairs.size());
  std::array<double, kNumInteractionTypes> threshold{}, spread{};
  for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
    std::vector<double> col(pairs.size());
    for (std::size_t e = 0; e < pairs.size(); ++e) col[e] = scores[e][c] = score(c, pairs[e].first, pairs[e].second);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    spread[c] = std::sqrt(var / static_cast<double>(col.size())) + 1e-12;
    auto mid = col.begin() + static_cast<std::ptrdiff_t>(col.size() / 2);
    std::nth_element(col.begin(), mid, col.end());
    threshold[c] = *mid;
  }

  for (std::size_t e = 0; e < pairs.size(); ++e) {
    PpiEdge edge{pairs[e].first, pairs[e].second, {}};
    bool any = false;
    std::size_t best = 0;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kNumInteractionTypes; ++c) {
      const double margin = (scores[e][c] - threshold[c]) / spread[c];
      if (margin > 0.0) {
        edge.labels[c] = 1;
        any = true;
      }
      if (margin > best_margin) {
        best_margin = margin;
        best = c;
      }
    }
    if (!any) edge.labels[best] = 1;
    out.graph.edges.push_back(edge);
  }
  return out;
}

}  // namespace mcppi
