#include "aiq/time.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "aiq/error.hpp"

namespace aiq {

namespace {

constexpr double kSecondsPerYear = 31556952.0;  // 365.2425 days

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
  int value = 0;
  if (pos + count > text.size()) throw Error(ErrorCode::ParseError, "timestamp", std::string(text));
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
  if (ec != std::errc{} || ptr != text.data() + pos + count) {
    throw Error(ErrorCode::ParseError, "timestamp", std::string(text));
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::ParseError, "timestamp", std::string(text));
  }
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = read_digits(text, 0, 4);
  expect(text, 4, '-');
  const int mo = read_digits(text, 5, 2);
  expect(text, 7, '-');
  const int d = read_digits(text, 8, 2);
  expect(text, 10, 'T');
  const int h = read_digits(text, 11, 2);
  expect(text, 13, ':');
  const int mi = read_digits(text, 14, 2);
  expect(text, 16, ':');
  const int s = read_digits(text, 17, 2);
  int ms = 0;
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ms = read_digits(text, 20, 3);
    pos = 23;
  }
  expect(text, pos, 'Z');
  if (pos + 1 != text.size()) throw Error(ErrorCode::ParseError, "timestamp", std::string(text));

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorCode::ParseError, "timestamp", std::string(text));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

double to_fractional_year(Timestamp t) {
  const double seconds = static_cast<double>(t.time_since_epoch().count()) / 1000.0;
  return 1970.0 + seconds / kSecondsPerYear;
}

Timestamp from_fractional_year(double year) {
  const double ms = std::round((year - 1970.0) * kSecondsPerYear * 1000.0);
  return Timestamp{Millis{static_cast<Millis::rep>(ms)}};
}

Timestamp SystemClock::now() {
  return std::chrono::floor<Millis>(std::chrono::system_clock::now());
}

SteppingClock::SteppingClock(Timestamp start, Millis step) : next_(start), step_(step) {}

Timestamp SteppingClock::now() {
  std::lock_guard lock(mutex_);
  const Timestamp current = next_;
  next_ += step_;
  return current;
}

}  // namespace aiq
