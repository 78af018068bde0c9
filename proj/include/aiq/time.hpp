#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>

namespace aiq {

using Millis = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Millis>;

// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_timestamp(Timestamp t);
// Accepts the format above, with or without the millisecond part. Throws
// Error(ParseError) otherwise.
Timestamp parse_timestamp(std::string_view text);

// Fractional Gregorian years, 1970.0 at the epoch.
double to_fractional_year(Timestamp t);
Timestamp from_fractional_year(double year);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() override;
};

// Test clock: returns `start`, then advances by `step` on each call.
class SteppingClock final : public Clock {
 public:
  explicit SteppingClock(Timestamp start, Millis step = Millis{1000});
  Timestamp now() override;

 private:
  std::mutex mutex_;
  Timestamp next_;
  Millis step_;
};

}  // namespace aiq
