#pragma once

#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

namespace facet::cli {

enum class LogFormat { plain, json };

inline LogFormat& log_format() {
    static LogFormat format = LogFormat::plain;
    return format;
}

inline void log_line(const char* level, const std::string& message) {
    if (log_format() == LogFormat::json) {
        nlohmann::ordered_json line;
        line["level"] = level;
        line["message"] = message;
        std::cerr << line.dump() << '\n';
    } else {
        std::cerr << level << ": " << message << '\n';
    }
}

inline void log_info(const std::string& message) { log_line("info", message); }
inline void log_warn(const std::string& message) { log_line("warn", message); }
inline void log_error(const std::string& message) { log_line("error", message); }

} // namespace facet::cli
