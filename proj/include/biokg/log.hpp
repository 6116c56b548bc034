#pragma once

// Single-line key=value structured logs on stderr.

#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include <spdlog/spdlog.h>

namespace biokg {

std::shared_ptr<spdlog::logger> logger();

using LogField = std::pair<std::string_view, std::string>;

// Renders `event=<event> k1=v1 ...`; values containing spaces, quotes or '='
// are double-quoted.
std::string format_fields(std::string_view event, std::initializer_list<LogField> fields);

void log_info(std::string_view event, std::initializer_list<LogField> fields = {});
void log_warn(std::string_view event, std::initializer_list<LogField> fields = {});
void log_error(std::string_view event, std::initializer_list<LogField> fields = {});

} // namespace biokg
