#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exocap {

/// Line-oriented `key: value` text shared by hand configs, scenarios,
/// envelopes, pipeline configs and episode manifests.
///
///   - one entry per line, `key: value`; the key is [A-Za-z0-9_.-]+
///   - `#` starts a comment that runs to end of line
///   - blank lines are ignored; keys may repeat
///   - values are split on ASCII whitespace when read as token lists
struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;

  std::vector<std::string> tokens() const;
  /// All tokens parsed as doubles; ParseError names the line on failure.
  std::vector<double> numbers() const;
};

class KvDocument {
 public:
  static KvDocument parse(std::string_view text);
  static KvDocument load(const std::string& path);

  const std::vector<KvEntry>& entries() const { return entries_; }
  const KvEntry* find(std::string_view key) const;
  std::vector<const KvEntry*> all(std::string_view key) const;
  const KvEntry& require(std::string_view key) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  double require_double(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

 private:
  std::vector<KvEntry> entries_;
};

/// Whole file as text; IoError when it cannot be opened.
std::string read_text_file(const std::string& path);

double parse_double(std::string_view token, int line);
std::uint64_t parse_uint(std::string_view token, int line);
std::int64_t parse_int(std::string_view token, int line);
bool parse_bool(std::string_view token, int line);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace exocap
