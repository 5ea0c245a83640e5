#include "exocap/kv_text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "exocap/error.hpp"

namespace exocap {

namespace {

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '.' || c == '-';
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<std::string> KvEntry::tokens() const {
  std::vector<std::string> out;
  std::istringstream in(value);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::vector<double> KvEntry::numbers() const {
  std::vector<double> out;
  for (const auto& tok : tokens()) out.push_back(parse_double(tok, line));
  return out;
}

KvDocument KvDocument::parse(std::string_view text) {
  KvDocument doc;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) parse_fail(line_no, "expected 'key: value'");
    const std::string_view key = trim(line.substr(0, colon));
    if (key.empty()) parse_fail(line_no, "empty key");
    for (char c : key) {
      if (!is_key_char(c)) parse_fail(line_no, "invalid character in key '" + std::string(key) + "'");
    }
    doc.entries_.push_back({std::string(key), std::string(trim(line.substr(colon + 1))), line_no});
  }
  return doc;
}

KvDocument KvDocument::load(const std::string& path) { return parse(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const KvEntry* KvDocument::find(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::vector<const KvEntry*> KvDocument::all(std::string_view key) const {
  std::vector<const KvEntry*> out;
  for (const auto& e : entries_) {
    if (e.key == key) out.push_back(&e);
  }
  return out;
}

const KvEntry& KvDocument::require(std::string_view key) const {
  const KvEntry* e = find(key);
  if (e == nullptr) fail(ErrorCode::ParseError, "missing key '" + std::string(key) + "'");
  return *e;
}

std::string KvDocument::get_string(std::string_view key, std::string fallback) const {
  const KvEntry* e = find(key);
  return e ? e->value : std::move(fallback);
}

double KvDocument::get_double(std::string_view key, double fallback) const {
  const KvEntry* e = find(key);
  return e ? parse_double(e->value, e->line) : fallback;
}

double KvDocument::require_double(std::string_view key) const {
  const KvEntry& e = require(key);
  return parse_double(e.value, e.line);
}

std::uint64_t KvDocument::get_uint(std::string_view key, std::uint64_t fallback) const {
  const KvEntry* e = find(key);
  return e ? parse_uint(e->value, e->line) : fallback;
}

bool KvDocument::get_bool(std::string_view key, bool fallback) const {
  const KvEntry* e = find(key);
  return e ? parse_bool(e->value, e->line) : fallback;
}

double parse_double(std::string_view token, int line) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) parse_fail(line, "not a number: '" + std::string(token) + "'");
  return value;
}

std::uint64_t parse_uint(std::string_view token, int line) {
  std::uint64_t value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) parse_fail(line, "not an unsigned integer: '" + std::string(token) + "'");
  return value;
}

std::int64_t parse_int(std::string_view token, int line) {
  std::int64_t value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) parse_fail(line, "not an integer: '" + std::string(token) + "'");
  return value;
}

bool parse_bool(std::string_view token, int line) {
  if (token == "true" || token == "1" || token == "yes") return true;
  if (token == "false" || token == "0" || token == "no") return false;
  parse_fail(line, "not a boolean: '" + std::string(token) + "'");
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace exocap
