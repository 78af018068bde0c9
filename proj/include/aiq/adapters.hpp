#pragma once

// Adapters connect a session to its subject. administer_item never throws
// for subject misbehaviour: timeouts, transport failures and refusals are
// encoded in the returned record.

#include <chrono>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aiq/battery.hpp"
#include "aiq/json_util.hpp"
#include "aiq/time.hpp"

namespace aiq {

enum class AdapterKind { HttpJson, Subprocess, ManualTranscript };

std::string_view to_string(AdapterKind kind);

inline constexpr Millis kDefaultTimeout{30000};
// Extra wall-clock allowance on top of the timeout for process teardown.
inline constexpr Millis kTimeoutGrace{500};

struct AdapterConfig {
  AdapterKind kind = AdapterKind::ManualTranscript;
  std::string endpoint;                       // HttpJson
  std::string command;                        // Subprocess
  std::vector<std::string> args;              // Subprocess
  std::map<std::string, std::string> headers; // HttpJson
  std::map<std::string, std::string> env;     // Subprocess
  Millis timeout = kDefaultTimeout;
  Millis inter_item_delay{0};

  bool operator==(const AdapterConfig&) const = default;
};

// Throws ConfigInvalid.
void validate_adapter_config(const AdapterConfig& cfg);

// `default_timeout` is used when the document has no "timeout_ms".
AdapterConfig adapter_config_from_json(const Json& json, Millis default_timeout = kDefaultTimeout);
Json to_json(const AdapterConfig& cfg);
// Default timeout honours AIQ_HTTP_TIMEOUT_MS.
Millis default_timeout_from_env();

enum class Outcome { Answered, Timeout, TransportError, Refused };

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

struct ResponseRecord {
  std::string item_id;
  std::string raw_response;
  Millis latency{0};
  Outcome outcome = Outcome::Answered;
  std::string detail;  // TransportError detail
  Timestamp received_at{};

  bool operator==(const ResponseRecord&) const = default;
};

Json to_json(const ResponseRecord& record);
ResponseRecord response_from_json(const Json& json, const std::string& context);

// The person relaying prompts for ManualTranscript subjects.
class Operator {
 public:
  virtual ~Operator() = default;
  // nullopt means the subject declined to answer.
  virtual std::optional<std::string> relay(const TestItem& item) = 0;
};

// Prints the prompt to `out`, reads one line from `in`. A line consisting of
// "!refused" records a refusal; end of input also counts as a refusal.
class StreamOperator final : public Operator {
 public:
  StreamOperator(std::istream& in, std::ostream& out);
  std::optional<std::string> relay(const TestItem& item) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

struct AdapterContext {
  Clock* clock = nullptr;       // defaults to the system clock
  Operator* op = nullptr;       // required for ManualTranscript
};

ResponseRecord administer_item(const AdapterConfig& cfg, const TestItem& item, const AdapterContext& ctx = {});

struct HealthReport {
  bool reachable = false;
  Millis round_trip{0};
  std::string detail;
};

HealthReport probe_subject(const AdapterConfig& cfg);

}  // namespace aiq
