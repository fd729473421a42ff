#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "facet/pin_store.hpp"
#include "facet/types.hpp"

namespace facet {

// Writes via a temporary file in the same directory followed by an atomic
// rename, so readers never observe a half-written file.
void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

// Embedding blob: little-endian header (magic "MSG1", u32 dimension,
// u64 count) followed by count records of (u64 pin id, f32 * dimension,
// f32 quality).
void write_pin_store(const PinStore& store, const std::filesystem::path& path);
PinStore read_pin_store(const std::filesystem::path& path);

// Activity log: one JSON object per line with keys user, pin, ts, kind.
// Writing emits users in ascending id order, records in timestamp order.
// Reading groups records by user and sorts each group by timestamp (stable,
// so equal-timestamp records keep file order); the result is sorted by user.
void write_action_logs(const std::vector<ActionLog>& logs, const std::filesystem::path& path);
std::vector<ActionLog> read_action_logs(const std::filesystem::path& path);

// Flat event stream in global timestamp order (stable for equal timestamps),
// for replay drivers.
struct Event {
    UserId user = 0;
    ActionRecord record;
};
std::vector<Event> read_event_stream(const std::filesystem::path& path);

const char* action_kind_name(ActionKind kind);
ActionKind parse_action_kind(const std::string& name); // throws ValidationError

} // namespace facet
