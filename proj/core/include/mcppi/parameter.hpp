#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcppi/tensor.hpp"

namespace mcppi {

/// A named, trainable leaf tensor. Copies share the same underlying storage,
/// so modules own Parameters by value and hand out pointers for optimizers.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor init);

  const std::string& name() const { return name_; }
  const Tensor& tensor() const { return tensor_; }
  const Shape& shape() const { return tensor_.shape(); }
  std::size_t size() const { return tensor_.size(); }

  std::span<const double> values() const { return tensor_.values(); }
  std::span<double> mutable_values() { return tensor_.node()->value; }
  /// Gradient buffer (zeros when nothing has flowed back since zero_grad()).
  std::vector<double> grad() const { return tensor_.grad(); }
  std::span<const double> raw_grad() const { return tensor_.node()->grad; }
  void zero_grad() { tensor_.zero_grad(); }

 private:
  std::string name_;
  Tensor tensor_;
};

using ParameterList = std::vector<Parameter*>;

/// One persisted tensor: shape plus row-major values.
struct StateEntry {
  Shape shape;
  std::vector<double> values;
  bool operator==(const StateEntry&) const = default;
};

/// Flat name -> tensor map; ordered so serialization is stable.
using StateDict = std::map<std::string, StateEntry>;

void export_parameters(const ParameterList& params, StateDict& out);
/// Throws ValidationError when a name is missing or a shape differs.
void import_parameters(const ParameterList& params, const StateDict& in);

/// JSON checkpoint format:
///   {"format": "mcppi-state-v1",
///    "tensors": {"<name>": {"shape": [rows, cols], "values": [...]}, ...}}
/// Keys sorted, doubles written with round-trip precision.
void save_state_json(const std::filesystem::path& path, const StateDict& state);
StateDict load_state_json(const std::filesystem::path& path);
std::string state_to_json_string(const StateDict& state);
StateDict state_from_json_string(const std::string& text);

/// Order-independent fingerprint of all values, for cache validation.
std::size_t state_fingerprint(const StateDict& state);

}  // namespace mcppi
