#include "dpre/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <system_error>

namespace dpre::cli {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key)
{
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

} // namespace

std::string normalize_key(std::string_view key)
{
    std::string out(key);
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& source)
{
    std::vector<ConfigEntry> entries;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text(raw);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        const std::string where = source + ":" + std::to_string(line) + ": ";
        if (eq == std::string_view::npos) {
            throw UsageError(where + "expected 'key = value'");
        }
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (!valid_key(key)) {
            throw UsageError(where + "bad key '" + std::string(key) + "'");
        }
        if (value.empty()) {
            throw UsageError(where + "missing value for '" + std::string(key) + "'");
        }
        auto normalized = normalize_key(key);
        if (!seen.insert(normalized).second) {
            throw UsageError(where + "duplicate key '" + std::string(key) + "'");
        }
        entries.push_back({std::move(normalized), std::string(value), line});
    }
    return entries;
}

std::vector<ConfigEntry> load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read config file '" + path + "'");
    }
    return parse_config(in, path);
}

std::string format_real(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t x)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string Manifest::parameter_text() const
{
    std::string text;
    for (const auto& [key, value] : parameters) {
        text += key + " = " + value + "\n";
    }
    return text;
}

std::string Manifest::digest() const
{
    return hex64(fnv1a(subcommand + "\n" + parameter_text()));
}

std::string Manifest::render() const
{
    std::ostringstream out;
    out << "# dpre run manifest\n";
    out << "# subcommand: " << subcommand << "\n";
    out << "# version: " << version << "\n";
    out << "# digest: " << digest() << "\n";
    for (const auto& file : outputs) {
        out << "# output: " << file << "\n";
    }
    out << parameter_text();
    return out.str();
}

} // namespace dpre::cli
