#include "facet/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "facet/dates.hpp"
#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/io.hpp"
#include "facet/parallel.hpp"

namespace facet::pipeline {

void ProfileStore::put(UserProfile profile) {
    profiles_[profile.user] = std::move(profile);
}

const UserProfile* ProfileStore::get(UserId user) const {
    const auto it = profiles_.find(user);
    return it == profiles_.end() ? nullptr : &it->second;
}

namespace {
const char* source_name(ProfileSource s) {
    return s == ProfileSource::batch ? "batch" : "online";
}

ProfileSource parse_source(const std::string& s) {
    if (s == "batch") return ProfileSource::batch;
    if (s == "online") return ProfileSource::online;
    throw ValidationError("unknown profile source '" + s + "'");
}
} // namespace

void ProfileStore::save(const std::filesystem::path& path) const {
    atomic_write_file(path, [&](std::ostream& out) {
        for (const auto& [user, profile] : profiles_) {
            nlohmann::ordered_json line;
            line["user"] = user;
            line["version"] = {{"date", iso_date(profile.version.date)},
                               {"source", source_name(profile.version.source)}};
            nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
            for (const ClusterSummary& s : profile.summaries) {
                clusters.push_back({{"medoid", s.medoid},
                                    {"importance", s.importance},
                                    {"count", s.member_count}});
            }
            line["clusters"] = std::move(clusters);
            out << line.dump() << '\n';
        }
    });
}

ProfileStore ProfileStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    ProfileStore store;
    std::string text;
    std::size_t lineno = 0;
    while (std::getline(in, text)) {
        ++lineno;
        if (text.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        try {
            UserProfile p;
            p.user = obj.at("user").get<std::uint64_t>();
            p.version.date = parse_iso_date(obj.at("version").at("date").get<std::string>());
            p.version.source = parse_source(obj.at("version").at("source").get<std::string>());
            for (const auto& c : obj.at("clusters")) {
                ClusterSummary s;
                s.medoid = c.at("medoid").get<std::uint64_t>();
                s.importance = c.at("importance").get<double>();
                s.member_count = c.at("count").get<std::uint32_t>();
                p.summaries.push_back(s);
            }
            store.put(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": missing or mistyped field: " + e.what());
        }
    }
    return store;
}

ProfileStore batch_infer(const std::vector<ActionLog>& logs, const PinStore& store,
                         const ProfileParams& params, std::int64_t as_of_day,
                         std::size_t threads, BatchStats* stats) {
    // End of the as-of day, exclusive: the window covers [now - W days, now).
    const std::int64_t now = (as_of_day + 1) * kSecondsPerDay;

    std::vector<const ActionLog*> ordered;
    ordered.reserve(logs.size());
    for (const auto& log : logs) ordered.push_back(&log);
    std::sort(ordered.begin(), ordered.end(),
              [](const ActionLog* a, const ActionLog* b) { return a->user < b->user; });

    std::vector<UserProfile> results(ordered.size());
    std::vector<ProfileBuildStats> per_user(ordered.size());
    parallel_for(ordered.size(), threads, [&](std::size_t i) {
        results[i] = build_profile(*ordered[i], store, params, now, &per_user[i]);
    });

    BatchStats local;
    BatchStats& st = stats ? *stats : local;
    ProfileStore out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        st.skipped_missing_embedding += per_user[i].skipped_missing_embedding;
        if (results[i].summaries.empty()) {
            ++st.users_skipped_empty;
            continue;
        }
        ++st.users_profiled;
        out.put(std::move(results[i]));
    }
    return out;
}

const std::deque<ActionRecord>* OnlineState::buffer(UserId user) const {
    const auto it = buffers_.find(user);
    return it == buffers_.end() ? nullptr : &it->second;
}

void OnlineState::append(UserId user, const ActionRecord& record) {
    auto& buf = buffers_[user];
    buf.push_back(record);
    while (buf.size() > buffer_cap_) buf.pop_front();
}

namespace {

// Applies the buffered engagements on top of a copy of the batch profile.
UserProfile fold_online(const UserProfile* batch, UserId user,
                        const std::deque<ActionRecord>& buffer, const PinStore& store,
                        double alpha, double lambda) {
    UserProfile out;
    if (batch) out = *batch;
    out.user = user;
    out.version.source = ProfileSource::online;
    std::int64_t last_ts = 0;
    for (const ActionRecord& r : buffer) {
        last_ts = std::max(last_ts, r.timestamp);
        const auto emb = store.embedding(r.pin);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = out.summaries.size();
        for (std::size_t i = 0; i < out.summaries.size(); ++i) {
            const double d = squared_euclidean(emb, store.embedding(out.summaries[i].medoid));
            if (d < best) {
                best = d;
                best_idx = i;
            }
        }
        if (best_idx < out.summaries.size() && best <= alpha) {
            // Same-day engagement has age ~0, so the decayed weight is 1.
            out.summaries[best_idx].importance += 1.0;
            out.summaries[best_idx].member_count += 1;
        } else {
            out.summaries.push_back({r.pin, 1.0, 1});
        }
    }
    (void)lambda; // decay of a same-day engagement is exactly 1
    std::sort(out.summaries.begin(), out.summaries.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.medoid < b.medoid;
    });
    if (!buffer.empty()) out.version.date = day_of_timestamp(last_ts);
    return out;
}

} // namespace

std::optional<UserProfile> online_update(const ProfileStore& batch, OnlineState& state,
                                         UserId user, const ActionRecord& record,
                                         const PinStore& store, double alpha, double lambda,
                                         OnlineUpdateStats* stats) {
    OnlineUpdateStats local;
    OnlineUpdateStats& st = stats ? *stats : local;
    if (!is_engagement(record.kind)) {
        ++st.skipped_not_engagement;
        return std::nullopt;
    }
    if (!store.contains(record.pin)) {
        ++st.skipped_unknown_pin;
        return std::nullopt;
    }
    const UserProfile* base = batch.get(user);
    if (base && day_of_timestamp(record.timestamp) < base->version.date) {
        ++st.skipped_stale;
        return std::nullopt;
    }
    state.append(user, record);
    ++st.applied;
    return fold_online(base, user, *state.buffer(user), store, alpha, lambda);
}

std::optional<UserProfile> serve(const ProfileStore& batch, const OnlineState& state,
                                 UserId user, const PinStore& store, double alpha,
                                 double lambda) {
    const std::deque<ActionRecord>* buf = state.buffer(user);
    const UserProfile* base = batch.get(user);
    if (buf && !buf->empty()) return fold_online(base, user, *buf, store, alpha, lambda);
    if (base) return *base;
    return std::nullopt;
}

std::vector<ActionLog> merge_logs(const std::vector<ActionLog>& a,
                                  const std::vector<ActionLog>& b) {
    std::map<UserId, ActionLog> merged;
    const auto fold = [&](const std::vector<ActionLog>& src) {
        for (const ActionLog& log : src) {
            auto& dst = merged[log.user];
            dst.user = log.user;
            dst.records.insert(dst.records.end(), log.records.begin(), log.records.end());
        }
    };
    fold(a);
    fold(b);
    std::vector<ActionLog> out;
    out.reserve(merged.size());
    for (auto& [user, log] : merged) {
        std::stable_sort(log.records.begin(), log.records.end(),
                         [](const ActionRecord& x, const ActionRecord& y) {
                             return x.timestamp < y.timestamp;
                         });
        out.push_back(std::move(log));
    }
    return out;
}

ProfileStore reconcile_daily(const std::vector<ActionLog>& history_logs,
                             const std::vector<ActionLog>& day_logs, const PinStore& store,
                             const ProfileParams& params, std::int64_t day,
                             OnlineState& state, std::size_t threads, BatchStats* stats) {
    const std::vector<ActionLog> merged = merge_logs(history_logs, day_logs);
    ProfileStore fresh = batch_infer(merged, store, params, day, threads, stats);
    state.clear();
    return fresh;
}

} // namespace facet::pipeline
