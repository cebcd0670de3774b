#pragma once

// Small text helpers shared by the file formats.

#include "memrc/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace memrc::text {

[[nodiscard]] inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Strips a trailing `#` or `;` comment.
[[nodiscard]] inline std::string_view strip_comment(std::string_view s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string_view::npos ? s : s.substr(0, pos);
}

[[nodiscard]] inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Whitespace tokenizer.
[[nodiscard]] inline std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const auto start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

/// Parses a finite double (decimal, scientific or hex-float). Throws InvalidArgument.
[[nodiscard]] inline double parse_double(std::string_view s) {
    s = trim(s);
    // std::from_chars does not accept a leading '+' or the 0x prefix.
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    bool negative = false;
    std::string_view body = s;
    if (!body.empty() && body.front() == '-') {
        negative = true;
        body.remove_prefix(1);
    }
    std::from_chars_result res{};
    if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
        body.remove_prefix(2);
        res = std::from_chars(body.data(), body.data() + body.size(), value, std::chars_format::hex);
    } else {
        res = std::from_chars(body.data(), body.data() + body.size(), value);
    }
    if (body.empty() || res.ec != std::errc{} || res.ptr != body.data() + body.size() ||
        !std::isfinite(value)) {
        throw InvalidArgument("not a finite number: '" + std::string(s) + "'");
    }
    return negative ? -value : value;
}

[[nodiscard]] inline std::int64_t parse_int(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    std::int64_t value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw InvalidArgument("not an integer: '" + std::string(s) + "'");
    }
    return value;
}

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

/// 17-significant-digit decimal.
[[nodiscard]] inline std::string format_full(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace memrc::text
