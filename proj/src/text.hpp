#pragma once

// Small text helpers shared by the file readers. Not part of the public API.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "octens/error.hpp"

namespace octens::text {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string where(int line) { return "line " + std::to_string(line); }

inline double parse_double(std::string_view s, int line) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || s.empty())
        fail(ErrorKind::Format, where(line) + ": not a number: `" + std::string(s) + "`");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, int line) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || s.empty())
        fail(ErrorKind::Format, where(line) + ": not an unsigned integer: `" + std::string(s) + "`");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    out << content;
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Splits file content into lines, dropping one trailing empty line and any
// trailing carriage returns.
inline std::vector<std::string_view> lines(std::string_view content) {
    auto out = split(content, '\n');
    if (!out.empty() && out.back().empty()) out.pop_back();
    for (auto& l : out)
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return out;
}

}  // namespace octens::text
