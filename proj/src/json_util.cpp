#include "aiq/json_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "aiq/error.hpp"

namespace aiq {

double quantize(double value) {
  if (!std::isfinite(value)) return value;
  const double scaled = std::round(value * 1e9);
  if (std::abs(scaled) > 9e15) return value;  // beyond exact 9-digit resolution
  const double q = scaled / 1e9;
  return q == 0.0 ? 0.0 : q;  // no "-0"
}

Json number(double value) { return Json(quantize(value)); }

std::string canonical_dump(const Json& value) {
  return value.dump(2, ' ', false, Json::error_handler_t::strict) + "\n";
}

Json parse_json_text(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < limit; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw Error(ErrorCode::ParseError, std::string(origin) + ":" + std::to_string(line), e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string(), "no such file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string(), "cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." +
                   std::to_string(std::hash<std::string_view>{}(text) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StoreWriteError, path.string(), "cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::StoreWriteError, path.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::StoreWriteError, path.string(), "rename failed");
  }
}

FieldReader::FieldReader(const Json& object, std::string context)
    : object_(object), context_(std::move(context)) {
  if (!object_.is_object()) throw Error(ErrorCode::ParseError, context_, "expected a JSON object");
}

std::string FieldReader::path(std::string_view key) const {
  return context_.empty() ? std::string(key) : context_ + "." + std::string(key);
}

bool FieldReader::has(std::string_view key) const { return object_.contains(key); }

const Json& FieldReader::get(std::string_view key) {
  auto it = object_.find(key);
  if (it == object_.end()) throw Error(ErrorCode::ParseError, path(key), "missing field");
  seen_.emplace(key);
  return *it;
}

std::string FieldReader::string(std::string_view key) {
  const Json& v = get(key);
  if (!v.is_string()) throw Error(ErrorCode::ParseError, path(key), "expected string");
  return v.get<std::string>();
}

std::optional<std::string> FieldReader::optional_string(std::string_view key) {
  if (!has(key)) return std::nullopt;
  if (get(key).is_null()) return std::nullopt;
  return string(key);
}

double FieldReader::number(std::string_view key) {
  const Json& v = get(key);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, path(key), "expected number");
  return quantize(v.get<double>());
}

std::optional<double> FieldReader::optional_number(std::string_view key) {
  if (!has(key)) return std::nullopt;
  if (get(key).is_null()) return std::nullopt;
  return number(key);
}

std::int64_t FieldReader::integer(std::string_view key) {
  const Json& v = get(key);
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, path(key), "expected integer");
  return v.get<std::int64_t>();
}

bool FieldReader::boolean(std::string_view key) {
  const Json& v = get(key);
  if (!v.is_boolean()) throw Error(ErrorCode::ParseError, path(key), "expected boolean");
  return v.get<bool>();
}

Timestamp FieldReader::timestamp(std::string_view key) {
  const std::string text = string(key);
  try {
    return parse_timestamp(text);
  } catch (const Error&) {
    throw Error(ErrorCode::ParseError, path(key), "bad timestamp '" + text + "'");
  }
}

std::optional<Timestamp> FieldReader::optional_timestamp(std::string_view key) {
  if (!has(key) || get(key).is_null()) return std::nullopt;
  return timestamp(key);
}

std::map<std::string, std::string> FieldReader::string_map(std::string_view key) {
  const Json& v = object(key);
  std::map<std::string, std::string> out;
  for (const auto& [k, value] : v.items()) {
    if (!value.is_string()) throw Error(ErrorCode::ParseError, path(key) + "." + k, "expected string");
    out.emplace(k, value.get<std::string>());
  }
  return out;
}

std::vector<std::string> FieldReader::string_list(std::string_view key) {
  const Json& v = array(key);
  std::vector<std::string> out;
  for (const auto& value : v) {
    if (!value.is_string()) throw Error(ErrorCode::ParseError, path(key), "expected array of strings");
    out.push_back(value.get<std::string>());
  }
  return out;
}

const Json& FieldReader::array(std::string_view key) {
  const Json& v = get(key);
  if (!v.is_array()) throw Error(ErrorCode::ParseError, path(key), "expected array");
  return v;
}

const Json& FieldReader::object(std::string_view key) {
  const Json& v = get(key);
  if (!v.is_object()) throw Error(ErrorCode::ParseError, path(key), "expected object");
  return v;
}

void FieldReader::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (!seen_.contains(key)) throw Error(ErrorCode::ParseError, path(key), "unknown field");
  }
}

}  // namespace aiq

namespace aiq {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

}  // namespace aiq

namespace aiq {

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace aiq
