#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace personagraph::detail {

bool is_valid_utf8(std::string_view s) noexcept;
std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

} // namespace personagraph::detail
