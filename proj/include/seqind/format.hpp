#pragma once

#include <array>
#include <charconv>
#include <string>
#include <system_error>

namespace seqind {

/// Shortest decimal text that parses back to exactly `x` ('.' separator,
/// at most 17 significant digits, locale independent).
[[nodiscard]] inline std::string format_real(double x)
{
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{})
        return "nan";
    return std::string(buf.data(), end);
}

} // namespace seqind
