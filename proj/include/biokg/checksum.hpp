#pragma once

#include <string>
#include <string_view>

namespace biokg {

// Lowercase hex SHA-256 of the exact bytes.
std::string sha256_hex(std::string_view bytes);

bool is_sha256_hex(std::string_view text) noexcept;

} // namespace biokg
