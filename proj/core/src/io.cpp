#include "facet/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "facet/errors.hpp"

namespace facet {

namespace {

constexpr char kBlobMagic[4] = {'M', 'S', 'G', '1'};

// Fixed-width little-endian encoding, independent of host byte order.
template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T get_le(std::istream& in) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof buf);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

void put_f32(std::ostream& out, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    put_le<std::uint32_t>(out, bits);
}

float get_f32(std::istream& in) {
    const std::uint32_t bits = get_le<std::uint32_t>(in);
    float value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

} // namespace

void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        writer(out);
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                          "': " + ec.message());
}

void write_pin_store(const PinStore& store, const std::filesystem::path& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out.write(kBlobMagic, sizeof kBlobMagic);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.dimension()));
        put_le<std::uint64_t>(out, store.size());
        for (std::size_t i = 0; i < store.size(); ++i) {
            put_le<std::uint64_t>(out, store.id_at(i));
            for (const float v : store.row(i)) put_f32(out, v);
            put_f32(out, store.quality_at(i));
        }
    });
}

PinStore read_pin_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    char magic[4];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kBlobMagic, sizeof magic) != 0)
        throw IoError("'" + path.string() + "' is not an embedding blob (bad magic)");
    const auto dimension = get_le<std::uint32_t>(in);
    const auto count = get_le<std::uint64_t>(in);
    if (!in) throw IoError("truncated header in '" + path.string() + "'");

    PinStore store(dimension);
    std::vector<float> row(dimension);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto id = get_le<std::uint64_t>(in);
        for (auto& v : row) v = get_f32(in);
        const float quality = get_f32(in);
        if (!in)
            throw IoError("truncated record " + std::to_string(i) + " in '" + path.string() + "'");
        store.add(id, row, quality);
    }
    return store;
}

const char* action_kind_name(ActionKind kind) {
    switch (kind) {
        case ActionKind::repin: return "repin";
        case ActionKind::click: return "click";
        case ActionKind::impression: return "impression";
    }
    return "unknown";
}

ActionKind parse_action_kind(const std::string& name) {
    if (name == "repin") return ActionKind::repin;
    if (name == "click") return ActionKind::click;
    if (name == "impression") return ActionKind::impression;
    throw ValidationError("unknown action kind '" + name + "'");
}

void write_action_logs(const std::vector<ActionLog>& logs, const std::filesystem::path& path) {
    std::vector<const ActionLog*> ordered;
    ordered.reserve(logs.size());
    for (const auto& log : logs) ordered.push_back(&log);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ActionLog* a, const ActionLog* b) { return a->user < b->user; });

    atomic_write_file(path, [&](std::ostream& out) {
        for (const ActionLog* log : ordered) {
            for (const auto& r : log->records) {
                nlohmann::ordered_json line;
                line["user"] = log->user;
                line["pin"] = r.pin;
                line["ts"] = static_cast<std::uint64_t>(r.timestamp);
                line["kind"] = action_kind_name(r.kind);
                out << line.dump() << '\n';
            }
        }
    });
}

namespace {
std::vector<Event> parse_event_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<Event> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        try {
            Event ev;
            ev.user = obj.at("user").get<std::uint64_t>();
            ev.record.pin = obj.at("pin").get<std::uint64_t>();
            ev.record.timestamp = static_cast<std::int64_t>(obj.at("ts").get<std::uint64_t>());
            ev.record.kind = parse_action_kind(obj.at("kind").get<std::string>());
            events.push_back(ev);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": missing or mistyped field: " + e.what());
        }
    }
    return events;
}
} // namespace

std::vector<ActionLog> read_action_logs(const std::filesystem::path& path) {
    std::map<UserId, ActionLog> grouped;
    for (const Event& ev : parse_event_lines(path)) {
        auto& log = grouped[ev.user];
        log.user = ev.user;
        log.records.push_back(ev.record);
    }
    std::vector<ActionLog> logs;
    logs.reserve(grouped.size());
    for (auto& [user, log] : grouped) {
        std::stable_sort(log.records.begin(), log.records.end(),
                         [](const ActionRecord& a, const ActionRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        logs.push_back(std::move(log));
    }
    return logs;
}

std::vector<Event> read_event_stream(const std::filesystem::path& path) {
    std::vector<Event> events = parse_event_lines(path);
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return a.record.timestamp < b.record.timestamp;
    });
    return events;
}

} // namespace facet
