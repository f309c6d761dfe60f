#include "mcppi/splits.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mcppi/errors.hpp"

namespace mcppi {

using nlohmann::json;

const char* scheme_name(SplitScheme s) {
  switch (s) {
    case SplitScheme::kRandom: return "random";
    case SplitScheme::kBfs: return "bfs";
    case SplitScheme::kDfs: return "dfs";
  }
  return "?";
}

SplitScheme parse_scheme(const std::string& s) {
  if (s == "random") return SplitScheme::kRandom;
  if (s == "bfs") return SplitScheme::kBfs;
  if (s == "dfs") return SplitScheme::kDfs;
  throw ConfigError("unknown split scheme '" + s + "' (expected random|bfs|dfs)");
}

const char* subset_name(SubsetLabel s) {
  switch (s) {
    case SubsetLabel::kBS: return "BS";
    case SubsetLabel::kES: return "ES";
    case SubsetLabel::kNS: return "NS";
  }
  return "?";
}

namespace {

void check_ratios(const SplitRatios& r) {
  if (r.train <= 0.0 || r.val < 0.0 || r.test <= 0.0) throw ConfigError("split ratios must be positive");
  if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

Partition random_partition(const PpiGraph& g, const SplitRatios& r, std::uint64_t seed) {
  const std::size_t n = g.edges.size();
  const auto n_test = static_cast<std::size_t>(std::llround(r.test * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(r.val * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Partition p;
  p.scheme = SplitScheme::kRandom;
  p.seed = seed;
  p.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  p.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
               order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  p.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  return p;
}

Partition traversal_partition(const PpiGraph& g, SplitScheme scheme, const SplitRatios& r, std::uint64_t seed,
                              double max_overshoot) {
  const std::size_t n = g.edges.size();
  const std::size_t np = g.n_proteins();
  const auto n_test = static_cast<std::size_t>(std::llround(r.test * static_cast<double>(n)));
  const auto n_held = static_cast<std::size_t>(std::llround((r.test + r.val) * static_cast<double>(n)));

  std::vector<std::vector<std::size_t>> neighbors(np), incident(np);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = g.edges[k];
    neighbors[e.a].push_back(e.b);
    neighbors[e.b].push_back(e.a);
    incident[e.a].push_back(k);
    incident[e.b].push_back(k);
  }
  for (auto& nb : neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<bool> collected(np, false), discovered(np, false);
  std::vector<std::size_t> first_rank(n, kUnset);
  std::size_t touched = 0, rank = 0, test_boundary = kUnset;

  auto collect = [&](std::size_t protein) {
    collected[protein] = true;
    for (auto k : incident[protein]) {
      if (first_rank[k] == kUnset) {
        first_rank[k] = rank;
        ++touched;
      }
    }
    if (test_boundary == kUnset && touched >= n_test) test_boundary = rank;
    ++rank;
  };

  std::mt19937_64 rng(seed);
  std::deque<std::size_t> frontier;  // BFS: queue, DFS: stack at the back
  while (touched < n_held) {
    if (frontier.empty()) {
      std::vector<std::size_t> roots;
      for (std::size_t p = 0; p < np; ++p)
        if (!collected[p] && !discovered[p] && !incident[p].empty()) roots.push_back(p);
      if (roots.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, roots.size() - 1);
      const std::size_t root = roots[pick(rng)];
      discovered[root] = true;
      frontier.push_back(root);
    }
    if (scheme == SplitScheme::kBfs) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      collect(u);
      for (auto v : neighbors[u]) {
        if (!discovered[v]) {
          discovered[v] = true;
          frontier.push_back(v);
        }
      }
    } else {
      const std::size_t u = frontier.back();
      frontier.pop_back();
      if (collected[u]) continue;
      collect(u);
      // Push in descending order so the smallest index is explored first.
      for (auto it = neighbors[u].rbegin(); it != neighbors[u].rend(); ++it) {
        if (!collected[*it]) {
          discovered[*it] = true;
          frontier.push_back(*it);
        }
      }
    }
  }

  Partition p;
  p.scheme = scheme;
  p.seed = seed;
  for (std::size_t k = 0; k < n; ++k) {
    if (first_rank[k] == kUnset) {
      p.train.push_back(k);
    } else if (first_rank[k] <= test_boundary) {
      p.test.push_back(k);
    } else {
      p.val.push_back(k);
    }
  }
  const double achieved = static_cast<double>(touched) / static_cast<double>(n);
  const double wanted = r.val + r.test;
  if (p.train.empty() || p.test.empty() || achieved - wanted > max_overshoot) {
    std::ostringstream os;
    os << scheme_name(scheme) << " traversal reached a held-out fraction of " << achieved << " (target " << wanted
       << ", train " << p.train.size() << ", test " << p.test.size() << " entries)";
    throw PartitionError(os.str());
  }
  return p;
}

}  // namespace

Partition partition(const PpiGraph& g, SplitScheme scheme, const SplitRatios& ratios, std::uint64_t seed,
                    double max_overshoot) {
  check_ratios(ratios);
  if (g.edges.empty()) throw PartitionError("ppi graph has no entries");
  if (scheme == SplitScheme::kRandom) return random_partition(g, ratios, seed);
  return traversal_partition(g, scheme, ratios, seed, max_overshoot);
}

std::vector<bool> train_proteins(const PpiGraph& g, const Partition& p) {
  std::vector<bool> seen(g.n_proteins(), false);
  for (auto k : p.train) {
    seen[g.edges.at(k).a] = true;
    seen[g.edges.at(k).b] = true;
  }
  return seen;
}

SubsetLabel subset_label(const PpiEdge& entry, const std::vector<bool>& seen_in_train) {
  auto seen = [&](std::size_t i) { return i < seen_in_train.size() && seen_in_train[i]; };
  const int count = static_cast<int>(seen(entry.a)) + static_cast<int>(seen(entry.b));
  return count == 2 ? SubsetLabel::kBS : count == 1 ? SubsetLabel::kES : SubsetLabel::kNS;
}

SubsetCounts count_subsets(const PpiGraph& g, const Partition& p, const std::vector<std::size_t>& entries) {
  const auto seen = train_proteins(g, p);
  SubsetCounts c;
  for (auto k : entries) {
    switch (subset_label(g.edges.at(k), seen)) {
      case SubsetLabel::kBS: ++c.bs; break;
      case SubsetLabel::kES: ++c.es; break;
      case SubsetLabel::kNS: ++c.ns; break;
    }
  }
  return c;
}

std::string partition_to_json_string(const Partition& p) {
  json j = {{"scheme", scheme_name(p.scheme)}, {"seed", p.seed}, {"train", p.train}, {"val", p.val}, {"test", p.test}};
  return j.dump();
}

void save_partition(const std::filesystem::path& path, const Partition& p) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << partition_to_json_string(p) << '\n';
}

Partition load_partition(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  try {
    json j = json::parse(is);
    Partition p;
    p.scheme = parse_scheme(j.at("scheme").get<std::string>());
    p.seed = j.at("seed").get<std::uint64_t>();
    p.train = j.at("train").get<std::vector<std::size_t>>();
    p.val = j.at("val").get<std::vector<std::size_t>>();
    p.test = j.at("test").get<std::vector<std::size_t>>();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace mcppi
