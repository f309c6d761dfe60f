#include "mcppi/metrics.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "mcppi/errors.hpp"

namespace mcppi {

double micro_f1(std::span<const double> probs, std::span<const double> labels, double threshold) {
  if (probs.size() != labels.size()) throw DimensionError("micro_f1: probs and labels differ in size");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred = probs[i] >= threshold;
    const bool pos = labels[i] > 0.5;
    if (pred && pos) ++tp;
    else if (pred) ++fp;
    else if (pos) ++fn;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double aupr(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw DimensionError("aupr: scores and labels differ in size");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t total_pos = 0;
  for (double y : labels) total_pos += y > 0.5 ? 1 : 0;
  if (total_pos == 0) throw MetricError("aupr needs at least one positive cell");

  double area = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]] > 0.5 ? 1 : 0;
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double rmsd(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("rmsd: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " residues");
  }
  if (a.empty()) throw InputError("rmsd of empty structures");
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m)
    for (int k = 0; k < 3; ++k) {
      const double d = a[m][k] - b[m][k];
      s += d * d;
    }
  return std::sqrt(s / static_cast<double>(a.size()));
}

std::vector<Vec3> perturb_to_rmsd(const std::vector<Vec3>& coords, double target, std::uint64_t seed) {
  if (coords.empty()) throw InputError("perturb_to_rmsd: structure has no residues");
  if (!(target >= 0.0)) throw ConfigError("perturb_to_rmsd: target RMSD must be >= 0");
  if (target == 0.0) return coords;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec3> noise(coords.size());
  for (auto& v : noise)
    for (auto& x : v) x = normal(rng);

  auto apply = [&](double s) {
    std::vector<Vec3> out(coords.size());
    for (std::size_t m = 0; m < coords.size(); ++m)
      for (int k = 0; k < 3; ++k) out[m][k] = coords[m][k] + s * noise[m][k];
    return out;
  };
  std::vector<Vec3> zero(coords.size(), Vec3{0.0, 0.0, 0.0});
  double s = target / rmsd(noise, zero);
  auto out = apply(s);
  // One correction pass absorbs the rounding of coords + s*noise.
  for (int pass = 0; pass < 3; ++pass) {
    const double achieved = rmsd(coords, out);
    if (std::abs(achieved - target) <= 1e-12 * target) break;
    s *= target / achieved;
    out = apply(s);
  }
  return out;
}

double parse_csv_number(const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  // ERANGE on underflow still yields the nearest subnormal (or zero).
  const bool overflow = errno == ERANGE && std::isinf(v);
  if (end == begin || *end != '\0' || overflow) throw ParseError("bad number '" + cell + "'");
  return v;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& records, bool append) {
  const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw InputError("cannot write " + path.string());
  if (!append || !exists) os << "run_id,scheme,subset,metric,value\n";
  os << std::setprecision(17);
  for (const auto& r : records) os << r.run_id << ',' << r.scheme << ',' << r.subset << ',' << r.metric << ',' << r.value << '\n';
}

std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::string line;
  std::vector<MetricRecord> out;
  bool header = true;
  while (std::getline(is, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    MetricRecord r;
    std::string value;
    std::getline(ss, r.run_id, ',');
    std::getline(ss, r.scheme, ',');
    std::getline(ss, r.subset, ',');
    std::getline(ss, r.metric, ',');
    std::getline(ss, value, ',');
    r.value = parse_csv_number(value);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mcppi
