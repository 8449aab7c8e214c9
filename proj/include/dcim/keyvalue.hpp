#pragma once

// Flat key-value text used for run configs and tech-library overrides.
//
//   # comment
//   w_store = 65536
//   precision = "INT8"
//   [ga]                 # keys below become ga.<key>
//   seed = 7
//
// Values are integers, decimals, booleans or double-quoted strings.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcim/error.hpp"

namespace dcim::kv {

enum class ValueKind { integer, number, boolean, string };

struct Entry {
    std::string key;
    std::string text;  // unquoted value text
    ValueKind kind = ValueKind::string;
    int line = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.';
        if (!ok) return false;
    }
    return key.front() != '.' && key.back() != '.';
}

inline bool is_integer(std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

inline bool is_number(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

[[noreturn]] inline void fail(const std::string& origin, int line, const std::string& key,
                              const std::string& what) {
    throw ConfigError(ErrorCode::parse, key, line,
                      origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline std::vector<Entry> parse(std::string_view text, const std::string& origin = "<config>") {
    std::vector<Entry> entries;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        // strip comments outside of quotes
        bool in_quotes = false;
        std::size_t cut = raw.size();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') in_quotes = !in_quotes;
            if (raw[i] == '#' && !in_quotes) {
                cut = i;
                break;
            }
        }
        auto line = detail::trim(raw.substr(0, cut));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') detail::fail(origin, line_no, "", "unterminated section header");
            auto name = detail::trim(line.substr(1, line.size() - 2));
            if (!name.empty() && !detail::valid_key(name))
                detail::fail(origin, line_no, std::string(name), "invalid section name");
            section = name.empty() ? std::string() : std::string(name) + ".";
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            detail::fail(origin, line_no, "", "expected 'key = value'");
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (!detail::valid_key(key))
            detail::fail(origin, line_no, std::string(key), "invalid key '" + std::string(key) + "'");

        Entry e;
        e.key = section + std::string(key);
        e.line = line_no;
        if (value.empty()) detail::fail(origin, line_no, e.key, "missing value for '" + e.key + "'");
        if (value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                detail::fail(origin, line_no, e.key, "unterminated string for '" + e.key + "'");
            e.text = std::string(value.substr(1, value.size() - 2));
            e.kind = ValueKind::string;
        } else if (value == "true" || value == "false") {
            e.text = std::string(value);
            e.kind = ValueKind::boolean;
        } else if (detail::is_integer(value)) {
            e.text = std::string(value);
            e.kind = ValueKind::integer;
        } else if (detail::is_number(value)) {
            e.text = std::string(value);
            e.kind = ValueKind::number;
        } else {
            detail::fail(origin, line_no, e.key,
                         "cannot parse value '" + std::string(value) + "' for '" + e.key + "'");
        }
        for (const auto& prev : entries)
            if (prev.key == e.key)
                detail::fail(origin, line_no, e.key, "duplicate key '" + e.key + "'");
        entries.push_back(std::move(e));
    }
    return entries;
}

inline std::vector<Entry> parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(ErrorCode::io, "", 0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

inline std::int64_t as_integer(const Entry& e) {
    if (e.kind != ValueKind::integer)
        throw ConfigError(ErrorCode::validation, e.key, e.line,
                          "line " + std::to_string(e.line) + ": '" + e.key + "' must be an integer");
    std::int64_t v = 0;
    std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
    return v;
}

inline double as_number(const Entry& e) {
    if (e.kind != ValueKind::integer && e.kind != ValueKind::number)
        throw ConfigError(ErrorCode::validation, e.key, e.line,
                          "line " + std::to_string(e.line) + ": '" + e.key + "' must be a number");
    double v = 0;
    std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
    return v;
}

inline bool as_bool(const Entry& e) {
    if (e.kind != ValueKind::boolean)
        throw ConfigError(ErrorCode::validation, e.key, e.line,
                          "line " + std::to_string(e.line) + ": '" + e.key + "' must be true or false");
    return e.text == "true";
}

inline const std::string& as_string(const Entry& e) {
    if (e.kind != ValueKind::string)
        throw ConfigError(ErrorCode::validation, e.key, e.line,
                          "line " + std::to_string(e.line) + ": '" + e.key + "' must be a quoted string");
    return e.text;
}

}  // namespace dcim::kv
