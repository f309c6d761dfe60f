#pragma once

#include <stdexcept>
#include <string>

namespace mcppi {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kConfig,   // invalid hyperparameters or flags
  kData,     // malformed / inconsistent input data
  kNumeric,  // NaN, degenerate inputs, failed numerical contracts
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorKind::kData, "dimension error: " + w) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& w) : Error(ErrorKind::kData, "index error: " + w) {}
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::kData, "input error: " + w) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorKind::kData, "parse error: " + w) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::kData, "validation error: " + w) {}
};

struct PartitionError : Error {
  explicit PartitionError(const std::string& w) : Error(ErrorKind::kData, "partition error: " + w) {}
};

struct MetricError : Error {
  explicit MetricError(const std::string& w) : Error(ErrorKind::kData, "metric error: " + w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::kConfig, "config error: " + w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::kNumeric, "numeric error: " + w) {}
};

struct GenerationError : Error {
  explicit GenerationError(const std::string& w) : Error(ErrorKind::kNumeric, "generation error: " + w) {}
};

}  // namespace mcppi
