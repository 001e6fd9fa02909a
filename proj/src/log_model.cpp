#include "lofscan/log_model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "lofscan/csv.hpp"

namespace lofscan {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
    return out;
}

}  // namespace

const char* to_string(CommandClass c) {
    switch (c) {
        case CommandClass::ActuatorDrive: return "actuator_drive";
        case CommandClass::SensorValue: return "sensor_value";
        case CommandClass::NetworkStatus: return "network_status";
        case CommandClass::Other: return "other";
    }
    return "other";
}

std::optional<CommandClass> command_class_from_string(std::string_view s) {
    const std::string l = lower(s);
    if (l == "actuator_drive") return CommandClass::ActuatorDrive;
    if (l == "sensor_value") return CommandClass::SensorValue;
    if (l == "network_status") return CommandClass::NetworkStatus;
    if (l == "other") return CommandClass::Other;
    return std::nullopt;
}

CommandClass classify(const CommandClassMap& classes, std::string_view command) {
    auto it = classes.find(command);
    return it == classes.end() ? CommandClass::Other : it->second;
}

CommandClassMap load_class_map(std::istream& in) {
    CommandClassMap map;
    std::string line;
    std::size_t lineno = 0;
    std::vector<csv::Field> fields;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!csv::split_record(line, fields)) throw ParseError(lineno, "unbalanced quotes");
        if (fields.size() != 2)
            throw ParseError(lineno, "expected 2 columns, got " + std::to_string(fields.size()));
        const std::string& command = fields[0].text;
        if (command.empty()) throw ParseError(lineno, "empty command name");
        auto cls = command_class_from_string(fields[1].text);
        if (!cls) throw ParseError(lineno, "unknown class '" + fields[1].text + "'");
        if (!map.emplace(command, *cls).second)
            throw ParseError(lineno, "command '" + command + "' classified twice");
    }
    return map;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    if (text.size() != 16 && text.size() != 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':') return std::nullopt;
    if (text.size() == 19 && text[16] != ':') return std::nullopt;
    if (!all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
        !all_digits(text.substr(8, 2)) || !all_digits(text.substr(11, 2)) ||
        !all_digits(text.substr(14, 2)))
        return std::nullopt;
    if (text.size() == 19 && !all_digits(text.substr(17, 2))) return std::nullopt;

    const int y = to_int(text.substr(0, 4));
    const int mo = to_int(text.substr(5, 2));
    const int d = to_int(text.substr(8, 2));
    const int h = to_int(text.substr(11, 2));
    const int mi = to_int(text.substr(14, 2));
    const int se = text.size() == 19 ? to_int(text.substr(17, 2)) : 0;

    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;
    const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return std::int64_t(days) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t day = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --day;
    }
    const std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{day}}};
    const int h = int(rem / 3600), mi = int(rem % 3600 / 60), se = int(rem % 60);
    char buf[24];
    if (se == 0)
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), h, mi);
    else
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), h, mi, se);
    return buf;
}

ParsedLog parse_log(std::istream& in, const ParseOptions& opts) {
    ParsedLog log;
    std::string line;
    std::size_t lineno = 0;
    std::vector<csv::Field> fields;
    bool have_prev = false;
    std::uint64_t prev_id = 0;
    std::int64_t prev_ts = 0;

    // Returns true when the caller should skip the row (lenient mode).
    auto reject = [&](const std::string& msg) -> bool {
        if (!opts.lenient) throw ParseError(lineno, msg);
        log.warnings.push_back("line " + std::to_string(lineno) + ": " + msg + " (row skipped)");
        return true;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!csv::split_record(line, fields)) {
            reject("unbalanced quotes");
            continue;
        }
        if (fields.size() != 5) {
            reject("expected 5 columns, got " + std::to_string(fields.size()));
            continue;
        }

        LogEntry e;
        {
            const auto& f = fields[0];
            auto [p, ec] = std::from_chars(f.text.data(), f.text.data() + f.text.size(), e.id);
            if (f.quoted || f.text.empty() || ec != std::errc{} ||
                p != f.text.data() + f.text.size()) {
                reject("id is not a non-negative integer: '" + f.text + "'");
                continue;
            }
        }
        if (!fields[1].quoted) {
            reject("timestamp must be quoted");
            continue;
        }
        if (auto ts = parse_timestamp(fields[1].text)) {
            e.timestamp = *ts;
        } else {
            reject("unparseable timestamp '" + fields[1].text + "'");
            continue;
        }
        if (!fields[2].quoted || fields[2].text.empty()) {
            reject("command must be a quoted, non-empty string");
            continue;
        }
        e.command = fields[2].text;

        const auto& num = fields[3];
        if (num.quoted) {
            reject("numeric argument must be unquoted");
            continue;
        }
        if (num.text != "NULL") {
            double v = 0;
            auto [p, ec] = std::from_chars(num.text.data(), num.text.data() + num.text.size(), v);
            if (num.text.empty() || ec != std::errc{} || p != num.text.data() + num.text.size() ||
                !std::isfinite(v)) {
                reject("numeric argument is neither a finite number nor NULL: '" + num.text + "'");
                continue;
            }
            e.numeric_arg = v;
        }

        const auto& str = fields[4];
        if (str.quoted) {
            if (str.text.empty()) {
                reject("string argument must be non-empty");
                continue;
            }
            e.string_arg = str.text;
        } else if (str.text != "NULL") {
            reject("string argument must be quoted or NULL");
            continue;
        }

        if (e.numeric_arg && e.string_arg) {
            reject("entry carries both a numeric and a string argument");
            continue;
        }

        if (have_prev) {
            if (e.id <= prev_id)
                log.warnings.push_back("line " + std::to_string(lineno) + ": id " +
                                       std::to_string(e.id) + " does not increase (previous " +
                                       std::to_string(prev_id) + ")");
            if (e.timestamp < prev_ts)
                log.warnings.push_back("line " + std::to_string(lineno) +
                                       ": timestamp moves backwards");
        }
        prev_id = e.id;
        prev_ts = e.timestamp;
        have_prev = true;

        log.entries.push_back(std::move(e));
        if (opts.keep_raw_lines) log.raw_lines.push_back(line);
    }
    return log;
}

std::string serialize_entry(const LogEntry& e) {
    std::string out = std::to_string(e.id);
    out += ',';
    out += csv::quote(format_timestamp(e.timestamp));
    out += ',';
    out += csv::quote(e.command);
    out += ',';
    out += e.numeric_arg ? csv::format_double(*e.numeric_arg) : std::string("NULL");
    out += ',';
    out += e.string_arg ? csv::quote(*e.string_arg) : std::string("NULL");
    return out;
}

void serialize_entries(std::span<const LogEntry> entries, std::ostream& out) {
    for (const LogEntry& e : entries) out << serialize_entry(e) << '\n';
}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0;
    std::size_t star_p = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star_p = p++;
            star_t = t;
        } else if (star_p != std::string_view::npos) {
            p = star_p + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

bool is_excluded(const LogEntry& e, const FilterConfig& cfg, const CommandClassMap& classes) {
    if (cfg.excluded_classes.count(classify(classes, e.command))) return true;
    for (const std::string& pat : cfg.excluded_command_patterns)
        if (glob_match(pat, e.command)) return true;
    return false;
}

std::vector<LogEntry> filter_entries(std::span<const LogEntry> entries, const FilterConfig& cfg,
                                     const CommandClassMap& classes) {
    std::vector<LogEntry> kept;
    for (const LogEntry& e : entries)
        if (!is_excluded(e, cfg, classes)) kept.push_back(e);
    return kept;
}

std::vector<std::span<const LogEntry>> chunk_entries(std::span<const LogEntry> entries,
                                                     std::size_t chunk_size) {
    if (chunk_size < 1) throw ConfigError("chunk size must be >= 1");
    std::vector<std::span<const LogEntry>> chunks;
    for (std::size_t i = 0; i < entries.size(); i += chunk_size)
        chunks.push_back(entries.subspan(i, std::min(chunk_size, entries.size() - i)));
    return chunks;
}

}  // namespace lofscan
