// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autoguide::text {

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

/// Trims and replaces every internal whitespace run (newlines included) with one space.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : trim(s)) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool is_ascii_punct(char c) noexcept {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
           (c >= '{' && c <= '~');
}

/// Lowercases, drops ASCII punctuation and collapses whitespace. Idempotent.
inline std::string canonicalize(std::string_view s) {
    std::string stripped;
    stripped.reserve(s.size());
    for (char c : s)
        if (!is_ascii_punct(c)) stripped.push_back(c);
    return collapse_whitespace(to_lower_ascii(stripped));
}

inline std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find('\n', start);
        if (end == std::string_view::npos) end = s.size();
        lines.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

inline std::optional<std::string> first_nonempty_line(std::string_view s) {
    for (auto line : split_lines(s)) {
        auto t = trim(line);
        if (!t.empty()) return std::string(t);
    }
    return std::nullopt;
}

/// Text up to the first blank line, ignoring leading blank lines; lines joined by single spaces.
inline std::string first_paragraph(std::string_view s) {
    std::string out;
    bool started = false;
    for (auto line : split_lines(s)) {
        auto t = trim(line);
        if (t.empty()) {
            if (started) break;
            continue;
        }
        if (started) out.push_back(' ');
        out.append(t);
        started = true;
    }
    return collapse_whitespace(out);
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

inline bool starts_with_icase(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    return to_lower_ascii(s.substr(0, prefix.size())) == to_lower_ascii(prefix);
}

/// Shortest decimal form that round-trips to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// All maximal runs of ASCII digits, in order of appearance.
inline std::vector<long long> integer_tokens(std::string_view s) {
    std::vector<long long> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] >= '0' && s[i] <= '9') {
            std::size_t j = i;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            long long value = 0;
            auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + j, value);
            if (ec == std::errc{}) out.push_back(value);
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace autoguide::text
