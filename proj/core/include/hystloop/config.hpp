#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hystloop/loop.hpp"
#include "hystloop/tuning.hpp"

namespace hystloop {

/// Flat, sectioned key-value config: one `section.key = value` per line,
/// `#` comments. Unknown keys are hard errors, detected after building.
class FlatConfig {
 public:
  static FlatConfig parse_file(const std::filesystem::path& path);
  static FlatConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  /// Applies a `key=value` override onto the raw map.
  void apply_override(const std::string& key_value);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::optional<std::string> get_optional_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  std::optional<double> get_optional_double(const std::string& key);
  long get_long(const std::string& key, long fallback);
  bool get_bool(const std::string& key, bool fallback);

  /// Marks every key under `prefix.` as consumed (sections a command ignores).
  void consume_prefix(const std::string& prefix);

  /// Throws ConfigError naming the first unknown (never consumed) key.
  void ensure_fully_consumed() const;

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::string origin_;
};

/// Builds the loop config, consuming run.*, reference.*, plant.*,
/// controller.* and loop.* keys; defaults expanded, validation applied.
LoopConfig load_loop_config(FlatConfig& fc);

/// Builds the tuning spec on top of a loop config, consuming tune.* keys.
TuneSpec load_tune_spec(FlatConfig& fc, LoopConfig base);

/// Fully resolved flat echo of a loop config, in canonical key order.
/// The echo alone suffices to reproduce the run.
std::vector<std::pair<std::string, std::string>> config_echo(const LoopConfig& cfg);

}  // namespace hystloop
