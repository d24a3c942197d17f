#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rda::cli {

/// Flat dotted-key configuration ("train.epochs": 100). Starts from a set of
/// defaults; every later source may only set keys that already exist.
/// Nested JSON objects are flattened on load, so {"train": {"epochs": 3}} and
/// {"train.epochs": 3} are equivalent.
class RunConfig {
 public:
  explicit RunConfig(nlohmann::ordered_json defaults);

  /// Merges a JSON document. Throws ConfigError on unknown keys or
  /// malformed JSON, IoError if the file cannot be read.
  void merge_file(const std::filesystem::path& path);
  void merge(const nlohmann::ordered_json& doc);

  /// Applies one `key=value` override. The value is parsed as JSON when
  /// possible, otherwise taken as a string.
  void apply_override(std::string_view assignment);

  void set(const std::string& key, nlohmann::ordered_json value);
  bool contains(const std::string& key) const { return values_.contains(key); }

  double get_double(const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Fully resolved configuration, one line of JSON.
  std::string dump() const { return values_.dump(); }

 private:
  const nlohmann::ordered_json& at(const std::string& key) const;

  nlohmann::ordered_json values_;
};

}  // namespace rda::cli
