#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aiq/time.hpp"

namespace aiq {

using Json = nlohmann::json;

// Rounds to 9 fractional digits; every number written to or read from a
// canonical file goes through this.
double quantize(double value);
Json number(double value);

// Sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const Json& value);

// Parses text; syntax errors become Error(ParseError, "line N", ...).
Json parse_json_text(std::string_view text, std::string_view origin);
// FileNotFound if absent, then parse_json_text.
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Write via temp file + rename. Errors map to StoreWriteError.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

// Compact decimal rendering for messages (up to 9 significant digits).
std::string format_number(double value);

// RFC 4180 field quoting (quotes only when needed).
std::string csv_field(std::string_view value);

// Strict object reader: every key must be consumed before finish().
class FieldReader {
 public:
  FieldReader(const Json& object, std::string context);
  FieldReader(Json&&, std::string) = delete;  // the reader keeps a reference

  bool has(std::string_view key) const;
  const Json& get(std::string_view key);
  std::string string(std::string_view key);
  std::optional<std::string> optional_string(std::string_view key);
  double number(std::string_view key);
  std::optional<double> optional_number(std::string_view key);
  std::int64_t integer(std::string_view key);
  bool boolean(std::string_view key);
  Timestamp timestamp(std::string_view key);
  std::optional<Timestamp> optional_timestamp(std::string_view key);
  std::map<std::string, std::string> string_map(std::string_view key);
  std::vector<std::string> string_list(std::string_view key);
  const Json& array(std::string_view key);
  const Json& object(std::string_view key);

  // Throws ParseError on any key that was never read.
  void finish() const;

  const std::string& context() const { return context_; }

 private:
  std::string path(std::string_view key) const;

  const Json& object_;
  std::string context_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace aiq
