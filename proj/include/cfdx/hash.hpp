#pragma once

#include <string>
#include <string_view>

namespace cfdx {

// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view data);

}  // namespace cfdx
