#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcppi/ppi_net.hpp"

namespace mcppi {

enum class SplitScheme { kRandom, kBfs, kDfs };
const char* scheme_name(SplitScheme s);
SplitScheme parse_scheme(const std::string& s);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Indices into PpiGraph::edges.
struct Partition {
  SplitScheme scheme = SplitScheme::kRandom;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  bool operator==(const Partition&) const = default;
};

/// Random: shuffle entries and slice at round(val*n) / round(test*n).
///
/// BFS / DFS: traverse the PPI graph from a seeded random root (neighbours
/// in ascending protein index, restarting from a fresh random root when a
/// component is exhausted) and collect proteins until the entries touching
/// the collected set reach round((val+test)*n). Every such entry leaves
/// train. Of those, an entry goes to test when its earliest-collected
/// endpoint was collected before the entries touching the traversal prefix
/// reached round(test*n); the rest go to val. Train entries therefore never
/// touch a collected protein, so val/test hold only ES and NS pairs.
///
/// Throws ConfigError for bad ratios and PartitionError when the traversal
/// overshoots the held-out target by more than `max_overshoot` (absolute
/// fraction of entries) or leaves train/test empty.
Partition partition(const PpiGraph& g, SplitScheme scheme, const SplitRatios& ratios, std::uint64_t seed,
                    double max_overshoot = 0.1);

enum class SubsetLabel { kBS, kES, kNS };
const char* subset_name(SubsetLabel s);

/// Proteins that occur in at least one train entry.
std::vector<bool> train_proteins(const PpiGraph& g, const Partition& p);

SubsetLabel subset_label(const PpiEdge& entry, const std::vector<bool>& seen_in_train);

struct SubsetCounts {
  std::size_t bs = 0, es = 0, ns = 0;
};
SubsetCounts count_subsets(const PpiGraph& g, const Partition& p, const std::vector<std::size_t>& entries);

/// {"scheme": "bfs", "seed": 7, "train": [...], "val": [...], "test": [...]}
void save_partition(const std::filesystem::path& path, const Partition& p);
Partition load_partition(const std::filesystem::path& path);
std::string partition_to_json_string(const Partition& p);

}  // namespace mcppi
