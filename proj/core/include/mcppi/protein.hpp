#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mcppi/tensor.hpp"

namespace mcppi {

/// The 20 standard residues, in the index order used for one-hot features.
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kNumAminoAcids = kAminoAcids.size();

/// Index into kAminoAcids; throws ValidationError for anything else.
std::uint8_t amino_acid_index(char code);

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

/// A protein as sequence plus C-alpha trace (Angstrom).
struct Protein {
  std::string id;
  std::vector<std::uint8_t> sequence;  // indices into kAminoAcids
  std::vector<Vec3> coords;

  std::size_t length() const { return sequence.size(); }
  std::string sequence_string() const;

  /// M x 20 one-hot residue features.
  Tensor features() const;

  /// Throws ValidationError unless len(seq) == len(coords) >= 2 and all
  /// coordinates are finite.
  void validate() const;
};

Protein make_protein(std::string id, std::string_view sequence, std::vector<Vec3> coords);

/// JSONL: one {"id": str, "seq": str, "coords": [[x,y,z], ...]} per line.
/// Blank lines are skipped.
std::vector<Protein> load_proteins(const std::filesystem::path& path);
std::vector<Protein> parse_proteins(std::string_view text);
Protein parse_protein_line(std::string_view line, std::size_t line_number);
void save_proteins(const std::filesystem::path& path, const std::vector<Protein>& proteins);
std::string protein_to_json_line(const Protein& p);

}  // namespace mcppi
