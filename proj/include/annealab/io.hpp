// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

#include "annealab/errors.hpp"

namespace annealab {

/// Shortest decimal representation that reparses to the same double
/// (std::to_chars round-trip guarantee). Keeps exported CSVs lossless and
/// byte-stable across reruns.
inline std::string double_to_string(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError(context + ": invalid number '" + std::string(text) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view text, const std::string& context) {
    std::int64_t v = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError(context + ": invalid integer '" + std::string(text) + "'");
    return v;
}

} // namespace annealab
