#pragma once

// Flat key/value option store shared by the config-file reader, the flag
// parser and manifest replay.
//
// Config file grammar, one entry per line:
//   line    := blank | comment | entry
//   comment := '#' anything
//   entry   := key '=' value [ '#' anything ]
//   key     := [a-z0-9_]+
// Leading and trailing whitespace around keys and values is ignored. Lists are
// comma separated. A repeated key is an error.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairrank/error.hpp"

namespace fairrank::cli {

/// Bad or missing command-line input; maps to exit code 2.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class Options {
 public:
  Options() = default;
  explicit Options(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void erase(const std::string& key) { values_.erase(key); }

  /// Entries of `other` replace entries of this store.
  void merge(const Options& other);

  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::optional<double> maybe_real(const std::string& key) const;
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

Options parse_config_text(const std::string& text, const std::string& origin = "config");
Options read_config_file(const std::filesystem::path& path);

}  // namespace fairrank::cli
