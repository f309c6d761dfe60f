#include "mcppi/protein.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcppi/errors.hpp"

namespace mcppi {

using nlohmann::json;

std::uint8_t amino_acid_index(char code) {
  const auto pos = kAminoAcids.find(code);
  if (pos == std::string_view::npos) {
    throw ValidationError(std::string("unknown amino-acid code '") + code + "'");
  }
  return static_cast<std::uint8_t>(pos);
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string Protein::sequence_string() const {
  std::string s;
  s.reserve(sequence.size());
  for (auto aa : sequence) s.push_back(kAminoAcids[aa]);
  return s;
}

Tensor Protein::features() const {
  std::vector<double> v(length() * kNumAminoAcids, 0.0);
  for (std::size_t m = 0; m < length(); ++m) v[m * kNumAminoAcids + sequence[m]] = 1.0;
  return Tensor::from({length(), kNumAminoAcids}, std::move(v));
}

void Protein::validate() const {
  if (sequence.size() != coords.size()) {
    throw ValidationError("protein '" + id + "': sequence length " + std::to_string(sequence.size()) +
                          " != coordinate count " + std::to_string(coords.size()));
  }
  if (sequence.size() < 2) throw ValidationError("protein '" + id + "' has fewer than 2 residues");
  for (auto aa : sequence) {
    if (aa >= kNumAminoAcids) throw ValidationError("protein '" + id + "': residue index out of range");
  }
  for (std::size_t m = 0; m < coords.size(); ++m) {
    for (double c : coords[m]) {
      if (!std::isfinite(c)) {
        throw ValidationError("protein '" + id + "': non-finite coordinate at residue " + std::to_string(m));
      }
    }
  }
}

Protein make_protein(std::string id, std::string_view sequence, std::vector<Vec3> coords) {
  Protein p;
  p.id = std::move(id);
  p.sequence.reserve(sequence.size());
  for (char c : sequence) p.sequence.push_back(amino_acid_index(c));
  p.coords = std::move(coords);
  p.validate();
  return p;
}

Protein parse_protein_line(std::string_view line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where + e.what());
  }
  try {
    std::vector<Vec3> coords;
    for (const auto& c : j.at("coords")) {
      if (c.size() != 3) throw ParseError(where + "coordinate entry has " + std::to_string(c.size()) + " values");
      coords.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
    }
    try {
      return make_protein(j.at("id").get<std::string>(), j.at("seq").get<std::string>(), std::move(coords));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  } catch (const json::exception& e) {
    throw ParseError(where + e.what());
  }
}

std::vector<Protein> parse_proteins(std::string_view text) {
  std::vector<Protein> out;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_number;
    auto line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) out.push_back(parse_protein_line(line, line_number));
    start = end + 1;
  }
  return out;
}

std::vector<Protein> load_proteins(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_proteins(ss.str());
}

std::string protein_to_json_line(const Protein& p) {
  json coords = json::array();
  for (const auto& c : p.coords) coords.push_back({c[0], c[1], c[2]});
  json j = {{"id", p.id}, {"seq", p.sequence_string()}, {"coords", std::move(coords)}};
  return j.dump();
}

void save_proteins(const std::filesystem::path& path, const std::vector<Protein>& proteins) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  for (const auto& p : proteins) os << protein_to_json_line(p) << '\n';
}

}  // namespace mcppi
