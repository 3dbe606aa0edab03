#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cfdx {

[[nodiscard]] std::string ascii_lower(std::string_view text);
[[nodiscard]] std::string_view trim(std::string_view text);
[[nodiscard]] std::vector<std::string_view> split_lines(std::string_view text);

// Lowercase, strip ASCII punctuation, collapse whitespace.
[[nodiscard]] std::string normalize_label(std::string_view label);

[[nodiscard]] bool labels_equal(std::string_view a, std::string_view b);

// Case-insensitive (ASCII) search; npos when absent.
[[nodiscard]] std::size_t find_ci(std::string_view haystack, std::string_view needle,
                                  std::size_t from = 0);

}  // namespace cfdx
