#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pef::text {

/// Shortest representation that parses back to the same double.
std::string round_trip(double value);

/// Fixed notation with `digits` decimals ("%.2f" for dB values).
std::string fixed(double value, int digits = 2);

double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// "x,y" pair, as taken by the CLI for positions.
std::pair<double, double> parse_pair(std::string_view s, std::string_view what);

/// Plain-text `key: value` document. Blank lines and lines starting with '#'
/// are ignored; keys are unique.
class KeyValue {
public:
    static KeyValue parse(std::string_view content, std::string_view origin);
    static KeyValue load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    void set(std::string key, std::string value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// Keys in insertion order.
    std::string dump() const;

private:
    std::map<std::string, std::string> entries_;
    std::vector<std::string> order_;
    std::string origin_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace pef::text
