#pragma once

// Command-line front end: config files, run manifests, output formatting
// and subcommand dispatch.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpre::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitCheckFailed = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigEntry {
    std::string key; // normalized: '-' becomes '_'
    std::string value;
    int line = 0;
};

/// `key = value` lines; `#` starts a comment. Throws UsageError naming the
/// source and line on malformed or duplicate entries.
std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& source);
std::vector<ConfigEntry> load_config(const std::string& path);

std::string normalize_key(std::string_view key);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double x);

std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t x);

struct Manifest {
    std::string subcommand;
    std::string version;
    std::map<std::string, std::string> parameters; // canonical values
    std::vector<std::string> outputs;

    // key = value lines in key order; the digest covers exactly this text.
    std::string parameter_text() const;
    std::string digest() const;
    // Loadable with --config: metadata lines are comments.
    std::string render() const;
};

/// Runs one command line. Output and diagnostics go to the given streams.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* version();

} // namespace dpre::cli
