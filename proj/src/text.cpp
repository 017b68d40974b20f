#include "pef/text.hpp"

#include "pef/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pef::text {

std::string round_trip(double value)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw DataError("cannot format number");
    }
    return {buf, end};
}

std::string fixed(double value, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string_view trim(std::string_view s)
{
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view token, std::string_view what)
{
    token = trim(token);
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw DataError(std::string(what) + ": not a number: '" + std::string(token) + "'");
    }
    if (!std::isfinite(value)) {
        throw DataError(std::string(what) + ": non-finite value");
    }
    return value;
}

long long parse_int(std::string_view token, std::string_view what)
{
    token = trim(token);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw DataError(std::string(what) + ": not an integer: '" + std::string(token) + "'");
    }
    return value;
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::pair<double, double> parse_pair(std::string_view s, std::string_view what)
{
    auto parts = split(s, ',');
    if (parts.size() != 2) {
        throw DataError(std::string(what) + ": expected 'x,y', got '" + std::string(s) + "'");
    }
    return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

KeyValue KeyValue::parse(std::string_view content, std::string_view origin)
{
    KeyValue kv;
    kv.origin_ = origin;
    std::size_t lineno = 0;
    for (const auto& raw : split(content, '\n')) {
        ++lineno;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw DataError(std::string(origin) + ":" + std::to_string(lineno) + ": expected 'key: value'");
        }
        std::string key(trim(line.substr(0, colon)));
        if (key.empty()) {
            throw DataError(std::string(origin) + ":" + std::to_string(lineno) + ": empty key");
        }
        if (kv.has(key)) {
            throw DataError(std::string(origin) + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv.set(std::move(key), std::string(trim(line.substr(colon + 1))));
    }
    return kv;
}

KeyValue KeyValue::load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

const std::string& KeyValue::get(const std::string& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw DataError(origin_ + ": missing field '" + key + "'");
    }
    return it->second;
}

void KeyValue::set(std::string key, std::string value)
{
    if (!has(key)) {
        order_.push_back(key);
    }
    entries_[std::move(key)] = std::move(value);
}

std::string KeyValue::dump() const
{
    std::string out;
    for (const auto& key : order_) {
        out += key + ": " + entries_.at(key) + "\n";
    }
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

} // namespace pef::text
