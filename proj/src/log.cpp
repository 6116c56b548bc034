#include "biokg/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_sinks.h>

namespace biokg {

std::shared_ptr<spdlog::logger> logger() {
    static auto instance = [] {
        auto l = spdlog::stderr_logger_mt("biokg");
        l->set_pattern("ts=%Y-%m-%dT%H:%M:%S.%eZ level=%l %v", spdlog::pattern_time_type::utc);
        if (const char* level = std::getenv("BIOKG_LOG_LEVEL"))
            l->set_level(spdlog::level::from_str(level));
        return l;
    }();
    return instance;
}

std::string format_fields(std::string_view event, std::initializer_list<LogField> fields) {
    std::string out = "event=";
    out += event;
    for (const auto& [key, value] : fields) {
        out += ' ';
        out += key;
        out += '=';
        const bool quote = value.empty() || value.find_first_of(" \t\"=\n") != std::string::npos;
        if (!quote) {
            out += value;
            continue;
        }
        out += '"';
        for (char c : value) {
            if (c == '"' || c == '\\')
                out += '\\';
            out += c == '\n' ? ' ' : c;
        }
        out += '"';
    }
    return out;
}

void log_info(std::string_view event, std::initializer_list<LogField> fields) {
    logger()->info(format_fields(event, fields));
}

void log_warn(std::string_view event, std::initializer_list<LogField> fields) {
    logger()->warn(format_fields(event, fields));
}

void log_error(std::string_view event, std::initializer_list<LogField> fields) {
    logger()->error(format_fields(event, fields));
}

} // namespace biokg
