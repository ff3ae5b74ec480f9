// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "util.hpp"

#include <cctype>
#include <cerrno>
#include <cstring>

#include "error.hpp"

namespace exp4fuse::util {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::ifstream open_input(const std::string& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading: " + std::strerror(errno));
    return in;
}

std::ofstream open_output(const std::string& path, bool binary) {
    auto mode = std::ios::out | std::ios::trunc;
    if (binary) mode |= std::ios::binary;
    std::ofstream out(path, mode);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing: " + std::strerror(errno));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::vector<std::string_view> split(std::string_view s, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string join(const std::vector<std::string>& parts, std::string_view delimiter) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += delimiter;
        out += parts[i];
    }
    return out;
}

bool contains_whitespace(std::string_view s) {
    for (char c : s)
        if (is_space(c)) return true;
    return false;
}

std::string location(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

}  // namespace exp4fuse::util
