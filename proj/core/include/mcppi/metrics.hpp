#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcppi/protein.hpp"

namespace mcppi {

// Score and label arguments are flattened n x C grids (any row-major order,
// as long as both use the same one).

/// Global TP/FP/FN over all cells with prediction = (prob >= threshold).
/// F1 = 2TP / (2TP + FP + FN), or 0 when the denominator is 0.
double micro_f1(std::span<const double> probs, std::span<const double> labels, double threshold = 0.5);

/// Micro-averaged area under the precision-recall step curve: cells ranked
/// by descending score, tied scores form one step, AUPR = sum dR * P.
/// Throws MetricError when no cell is positive.
double aupr(std::span<const double> scores, std::span<const double> labels);

/// sqrt(mean_m ||a_m - b_m||^2), no superposition.
double rmsd(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Adds i.i.d. Gaussian noise rescaled so that rmsd(coords, result) equals
/// `target` (relative error < 1e-9). Deterministic per seed; the same seed
/// gives the same noise direction for every target.
std::vector<Vec3> perturb_to_rmsd(const std::vector<Vec3>& coords, double target, std::uint64_t seed);

struct MetricRecord {
  std::string run_id;
  std::string scheme;
  std::string subset;  // BS / ES / NS / ALL
  std::string metric;
  double value = 0.0;
};

/// Parses one numeric CSV cell, keeping subnormal values and "nan".
/// Throws ParseError on anything else.
double parse_csv_number(const std::string& cell);

/// CSV with header run_id,scheme,subset,metric,value.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& records, bool append = false);
std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path);

}  // namespace mcppi
