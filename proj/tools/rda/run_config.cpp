#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rda/errors.hpp"

namespace rda::cli {

using json = nlohmann::ordered_json;

namespace {

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  if (node.is_object() && !node.empty()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
    return;
  }
  out.emplace_back(prefix, node);
}

// Only the kinds of value a default admits may replace it.
bool compatible(const json& current, const json& incoming) {
  if (current.is_null() || incoming.is_null()) return true;
  if (current.is_number()) return incoming.is_number();
  if (current.is_boolean()) return incoming.is_boolean();
  if (current.is_string()) return incoming.is_string();
  if (current.is_array()) return incoming.is_array();
  return current.type() == incoming.type();
}

}  // namespace

RunConfig::RunConfig(nlohmann::ordered_json defaults) : values_(std::move(defaults)) {}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + " must hold a JSON object");
  merge(doc);
}

void RunConfig::merge(const json& doc) {
  std::vector<std::pair<std::string, json>> flat;
  flatten(doc, "", flat);
  for (auto& [key, value] : flat) {
    if (key.empty()) continue;
    set(key, std::move(value));
  }
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override \"" + std::string(assignment) + "\" is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  set(key, std::move(value));
}

void RunConfig::set(const std::string& key, json value) {
  if (!values_.contains(key)) throw ConfigError("unknown configuration key \"" + key + "\"", key);
  auto& slot = values_[key];
  if (!compatible(slot, value)) {
    throw ConfigError("key \"" + key + "\" expects a value like " + slot.dump() + ", got " + value.dump(), key);
  }
  slot = std::move(value);
}

const json& RunConfig::at(const std::string& key) const {
  if (!values_.contains(key)) throw ConfigError("unknown configuration key \"" + key + "\"", key);
  return values_.at(key);
}

double RunConfig::get_double(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number()) throw ConfigError("key \"" + key + "\" must be a number", key);
  return v.get<double>();
}

std::optional<double> RunConfig::get_optional_double(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_null()) return std::nullopt;
  return get_double(key);
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && std::floor(d) == d) return static_cast<std::size_t>(d);
  }
  throw ConfigError("key \"" + key + "\" must be a non-negative integer, got " + v.dump(), key);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const { return static_cast<std::uint64_t>(get_size(key)); }

bool RunConfig::get_bool(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_boolean()) throw ConfigError("key \"" + key + "\" must be true or false", key);
  return v.get<bool>();
}

std::string RunConfig::get_string(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_string()) throw ConfigError("key \"" + key + "\" must be a string", key);
  return v.get<std::string>();
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_array()) throw ConfigError("key \"" + key + "\" must be an array", key);
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
      throw ConfigError("key \"" + key + "\" must hold non-negative integers", key);
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_array()) throw ConfigError("key \"" + key + "\" must be an array", key);
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("key \"" + key + "\" must hold numbers", key);
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace rda::cli
