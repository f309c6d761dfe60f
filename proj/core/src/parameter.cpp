#include "mcppi/parameter.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "mcppi/errors.hpp"

namespace mcppi {

using nlohmann::json;

Parameter::Parameter(std::string name, Tensor init)
    : name_(std::move(name)), tensor_(Tensor::from(init.shape(), std::vector<double>(init.values().begin(), init.values().end()), true)) {}

void export_parameters(const ParameterList& params, StateDict& out) {
  for (const Parameter* p : params) {
    out[p->name()] = StateEntry{p->shape(), std::vector<double>(p->values().begin(), p->values().end())};
  }
}

void import_parameters(const ParameterList& params, const StateDict& in) {
  for (Parameter* p : params) {
    auto it = in.find(p->name());
    if (it == in.end()) throw ValidationError("checkpoint has no tensor named '" + p->name() + "'");
    if (it->second.shape != p->shape()) {
      throw ValidationError("checkpoint tensor '" + p->name() + "' has shape " + it->second.shape.str() +
                            ", model expects " + p->shape().str());
    }
    auto dst = p->mutable_values();
    std::copy(it->second.values.begin(), it->second.values.end(), dst.begin());
  }
}

std::string state_to_json_string(const StateDict& state) {
  json tensors = json::object();
  for (const auto& [name, e] : state) {
    tensors[name] = {{"shape", {e.shape.rows, e.shape.cols}}, {"values", e.values}};
  }
  json doc = {{"format", "mcppi-state-v1"}, {"tensors", std::move(tensors)}};
  return doc.dump(1);
}

StateDict state_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint json: ") + e.what());
  }
  if (doc.value("format", "") != "mcppi-state-v1") throw ParseError("checkpoint json: unknown format tag");
  StateDict out;
  try {
    for (const auto& [name, t] : doc.at("tensors").items()) {
      StateEntry e;
      e.shape = {t.at("shape").at(0).get<std::size_t>(), t.at("shape").at(1).get<std::size_t>()};
      e.values = t.at("values").get<std::vector<double>>();
      if (e.values.size() != e.shape.size()) {
        throw ParseError("checkpoint tensor '" + name + "' value count does not match its shape");
      }
      out.emplace(name, std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint json: ") + e.what());
  }
  return out;
}

void save_state_json(const std::filesystem::path& path, const StateDict& state) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << state_to_json_string(state) << '\n';
}

StateDict load_state_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return state_from_json_string(ss.str());
}

std::size_t state_fingerprint(const StateDict& state) {
  std::size_t h = 0;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  for (const auto& [name, e] : state) {
    mix(std::hash<std::string>{}(name));
    for (double v : e.values) mix(std::hash<double>{}(v));
  }
  return h;
}

}  // namespace mcppi
