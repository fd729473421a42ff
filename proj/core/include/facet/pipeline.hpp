#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "facet/profile.hpp"
#include "facet/types.hpp"

namespace facet::pipeline {

// Persistent user -> profile map.  Iteration is ordered by user id, and the
// JSONL serialization below is byte-deterministic, so equal stores produce
// equal files.
class ProfileStore {
public:
    void put(UserProfile profile);
    const UserProfile* get(UserId user) const;
    std::size_t size() const { return profiles_.size(); }
    const std::map<UserId, UserProfile>& all() const { return profiles_; }

    // One JSON object per line, users ascending.  Atomic replace on save.
    void save(const std::filesystem::path& path) const;
    static ProfileStore load(const std::filesystem::path& path);

private:
    std::map<UserId, UserProfile> profiles_;
};

struct BatchStats {
    std::size_t users_profiled = 0;
    std::size_t users_skipped_empty = 0; // no usable engagement in the window
    std::size_t skipped_missing_embedding = 0;
};

// Daily batch job: builds a profile for every user whose trailing window
// holds at least one usable engagement, as of the end of as_of_day.
// Deterministic for any thread count.
ProfileStore batch_infer(const std::vector<ActionLog>& logs, const PinStore& store,
                         const ProfileParams& params, std::int64_t as_of_day,
                         std::size_t threads = 1, BatchStats* stats = nullptr);

// Same-day serving state: per user, up to `buffer_cap` most recent
// engagements.  The batch store is never mutated; the online view is
// recomputed from (batch profile, buffer), which makes updates replayable.
class OnlineState {
public:
    explicit OnlineState(std::size_t buffer_cap = defaults::kOnlineBuffer)
        : buffer_cap_(buffer_cap) {}

    const std::deque<ActionRecord>* buffer(UserId user) const;
    void append(UserId user, const ActionRecord& record);
    void clear() { buffers_.clear(); }
    std::size_t buffer_cap() const { return buffer_cap_; }

private:
    std::size_t buffer_cap_;
    std::map<UserId, std::deque<ActionRecord>> buffers_;
};

struct OnlineUpdateStats {
    std::size_t applied = 0;
    std::size_t skipped_unknown_pin = 0;
    std::size_t skipped_not_engagement = 0;
    std::size_t skipped_stale = 0; // timestamp before the batch version day
};

// Folds one engagement into the online view: buffer it, then recompute the
// user's online profile from the batch profile plus the buffer.  Each
// buffered pin joins the nearest summary (squared distance to the medoid at
// most alpha, importance +1) or founds a new singleton.  Medoids are never
// recomputed here.  Returns the refreshed online profile, or nothing if the
// event was skipped.
std::optional<UserProfile> online_update(const ProfileStore& batch, OnlineState& state,
                                         UserId user, const ActionRecord& record,
                                         const PinStore& store, double alpha, double lambda,
                                         OnlineUpdateStats* stats = nullptr);

// The profile served for a user right now: the online view when the user has
// same-day activity buffered, otherwise the batch profile.
std::optional<UserProfile> serve(const ProfileStore& batch, const OnlineState& state,
                                 UserId user, const PinStore& store, double alpha,
                                 double lambda);

// End-of-day job: rerun the batch over the full history including day_logs
// and drop all online buffers.  The result is identical to a from-scratch
// batch_infer over the merged logs, so online activity never leaks into
// persisted state.
ProfileStore reconcile_daily(const std::vector<ActionLog>& history_logs,
                             const std::vector<ActionLog>& day_logs, const PinStore& store,
                             const ProfileParams& params, std::int64_t day,
                             OnlineState& state, std::size_t threads = 1,
                             BatchStats* stats = nullptr);

// Merges per-user logs and re-sorts each user's records by timestamp.
std::vector<ActionLog> merge_logs(const std::vector<ActionLog>& a,
                                  const std::vector<ActionLog>& b);

} // namespace facet::pipeline
