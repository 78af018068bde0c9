#pragma once

// Session lifecycle: start, run (crash-resumable), abort.

#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include "aiq/adapters.hpp"
#include "aiq/battery.hpp"
#include "aiq/session.hpp"
#include "aiq/store.hpp"

namespace aiq {

// Throws InvalidBattery, UnknownSubject, ConfigInvalid. The battery is copied
// into the store and the Created session is persisted before returning.
Session start_session(Store& store, const Battery& battery, const std::string& subject_id, const AdapterConfig& cfg,
                      Clock& clock);

struct RunOptions {
  // Called after each item's response and score have been persisted.
  std::function<void(const Session&, const TestItem&)> after_item;
  // Stop (status stays Running) after administering this many items.
  std::size_t max_items = std::numeric_limits<std::size_t>::max();
};

// Administers every not-yet-answered item in battery order, persisting after
// each one. Complete and AwaitingGrades sessions are returned unchanged.
Session run_session(Store& store, const std::string& session_id, const AdapterContext& ctx,
                    const RunOptions& options = {});

Session abort_session(Store& store, const std::string& session_id, Clock& clock);

}  // namespace aiq
