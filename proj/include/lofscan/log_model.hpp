#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lofscan/errors.hpp"

namespace lofscan {

// One log row: id, timestamp, command name, and at most one argument, either
// numeric or string.
struct LogEntry {
    std::uint64_t id = 0;
    std::int64_t timestamp = 0;  // seconds since the Unix epoch
    std::string command;
    std::optional<double> numeric_arg;
    std::optional<std::string> string_arg;

    bool operator==(const LogEntry&) const = default;
};

enum class CommandClass { ActuatorDrive, SensorValue, NetworkStatus, Other };

const char* to_string(CommandClass c);
std::optional<CommandClass> command_class_from_string(std::string_view s);

using CommandClassMap = std::map<std::string, CommandClass, std::less<>>;

// Classification is total: commands absent from the map are Other.
CommandClass classify(const CommandClassMap& classes, std::string_view command);

// Loads a two-column CSV `command,class`. Throws ParseError on malformed rows,
// unknown class names, or commands listed twice.
CommandClassMap load_class_map(std::istream& in);

struct FilterConfig {
    std::set<CommandClass> excluded_classes{CommandClass::Other};
    std::vector<std::string> excluded_command_patterns;  // glob, whole name
};

struct ParseOptions {
    bool lenient = false;         // skip malformed rows with a warning
    bool keep_raw_lines = false;  // retain each entry's untouched source line
};

struct ParsedLog {
    std::vector<LogEntry> entries;
    std::vector<std::string> raw_lines;  // parallel to entries when requested
    std::vector<std::string> warnings;
};

// Parses the five-column log format. Strict mode throws ParseError carrying
// the offending line number; lenient mode records a warning and skips the row.
// Non-monotone ids or timestamps are warnings in both modes.
ParsedLog parse_log(std::istream& in, const ParseOptions& opts = {});

// Accepts "YYYY-MM-DD HH:MM" or "YYYY-MM-DD HH:MM:SS"; the short form means
// seconds = 0. Returns nothing for anything else.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// Inverse of parse_timestamp; uses the short form when seconds are zero.
std::string format_timestamp(std::int64_t epoch_seconds);

std::string serialize_entry(const LogEntry& e);
void serialize_entries(std::span<const LogEntry> entries, std::ostream& out);

// '*' (any run) and '?' (any one char) wildcards, anchored at both ends.
bool glob_match(std::string_view pattern, std::string_view text);

bool is_excluded(const LogEntry& e, const FilterConfig& cfg, const CommandClassMap& classes);

// Keeps entries in order, dropping excluded ones.
std::vector<LogEntry> filter_entries(std::span<const LogEntry> entries,
                                     const FilterConfig& cfg,
                                     const CommandClassMap& classes);

// Consecutive non-overlapping views over the input; the last chunk may be
// shorter. chunk_size must be >= 1.
std::vector<std::span<const LogEntry>> chunk_entries(std::span<const LogEntry> entries,
                                                     std::size_t chunk_size);

}  // namespace lofscan
