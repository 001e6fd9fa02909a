#include "lofscan/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lofscan/csv.hpp"
#include "lofscan/featurize.hpp"
#include "lofscan/toml_lite.hpp"

namespace lofscan::synth {

namespace {

constexpr std::int64_t kDaySeconds = 86400;
// Mass-duplicate bursts start this far after a sensor tick, so every burst
// sees the same inter-arrival gaps and vectorizes identically.
constexpr std::int64_t kBurstOffsetSeconds = 120;
constexpr int kBurstRounds = 3;
// Injected ranges must be separated by at least two default windows of
// ordinary entries to keep detection accounting unambiguous.
constexpr std::uint64_t kMinRangeGapEntries = 22;

// Behavior ranks order events that share a timestamp.
enum Rank : int {
    kSensors = 0,
    kPings = 1,
    kFans = 2,
    kLighting = 3,
    kFeeding = 4,
    kNoise = 5,
    kInjection = 6,
};

struct Event {
    std::int64_t t = 0;
    int rank = 0;
    std::uint64_t seq = 0;
    std::string command;
    std::optional<double> num;
    std::optional<std::string> str;
    int tag = -1;  // truth range this event belongs to, -1 for baseline
};

double uniform01(std::mt19937_64& g) {
    return std::ldexp(double(g() >> 11), -53);  // [0, 1)
}

// Inclusive bounds.
std::int64_t uniform_int(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
    return lo + std::int64_t(uniform01(g) * double(hi - lo + 1));
}

// Box-Muller instead of std::normal_distribution, whose output sequence is
// implementation defined; generated logs must not depend on the toolchain.
double gauss(std::mt19937_64& g) {
    const double u1 = 1.0 - uniform01(g);  // (0, 1]
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

template <typename T>
const T& choice(std::mt19937_64& g, const std::vector<T>& options) {
    return options[std::size_t(uniform_int(g, 0, std::int64_t(options.size()) - 1))];
}

int parse_hhmm(const std::string& s) {
    if (s.size() != 5 || s[2] != ':' || !std::isdigit((unsigned char)s[0]) ||
        !std::isdigit((unsigned char)s[1]) || !std::isdigit((unsigned char)s[3]) ||
        !std::isdigit((unsigned char)s[4]))
        throw ConfigError("expected HH:MM, got '" + s + "'");
    const int h = (s[0] - '0') * 10 + (s[1] - '0');
    const int m = (s[3] - '0') * 10 + (s[4] - '0');
    if (h > 23 || m > 59) throw ConfigError("time of day out of range: '" + s + "'");
    return h * 3600 + m * 60;
}

std::string hhmm(int seconds_of_day) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", seconds_of_day / 3600,
                  seconds_of_day % 3600 / 60);
    return buf;
}

double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

std::int64_t minutes_to_seconds(double minutes, const char* what) {
    const double s = minutes * 60.0;
    if (!(s >= 1.0)) throw ConfigError(std::string(what) + " must be at least 1 second");
    return std::llround(s);
}

struct Emitter {
    std::vector<Event> events;
    std::uint64_t seq = 0;

    void emit(std::int64_t t, int rank, std::string command, std::optional<double> num,
              std::optional<std::string> str, int tag = -1) {
        events.push_back({t, rank, seq++, std::move(command), num, std::move(str), tag});
    }
};

std::mt19937_64 stream(std::uint64_t seed, const std::string& tag) {
    return std::mt19937_64(seed ^ fnv1a64(tag));
}

bool needs_droid(const ScenarioConfig& cfg) {
    if (cfg.feeding) return true;
    for (const auto& inj : cfg.injections)
        if (inj.kind == "mutual_exclusion" || inj.kind == "manual_operation") return true;
    return false;
}

std::vector<int> droid_tanks(const ScenarioConfig& cfg) {
    return cfg.feeding ? cfg.feeding->tanks : std::vector<int>{1};
}

const std::vector<double> kSwingH{0, 120, 150};
const std::vector<double> kSwingV{5, -20, 125, 150};
const std::vector<std::string> kMoveDiff{"2,0", "2,-3", "4,2", "0,1"};
const std::vector<double> kLiftPos{0, 5, 6, 7, 10};

void check_config(const ScenarioConfig& cfg) {
    if (!(cfg.duration_hours > 0)) throw ConfigError("duration_hours must be positive");
    std::set<std::string> names;
    auto unique_name = [&](const std::string& n) {
        if (n.empty()) throw ConfigError("empty command name");
        if (!names.insert(n).second) throw ConfigError("command '" + n + "' defined twice");
    };
    for (const auto& s : cfg.sensors) {
        unique_name(s.name);
        minutes_to_seconds(s.period_minutes, "sensor period");
        if (s.decimals < 0 || s.decimals > 6) throw ConfigError("sensor decimals must be 0..6");
        if (!(s.min_value < s.max_value)) throw ConfigError("sensor min_value must be < max_value");
        if (round_to(s.min_value, s.decimals) <= 0.0)
            throw ConfigError("sensor min_value must round above 0 (0 marks injected readings)");
        if (!(s.stddev >= 0)) throw ConfigError("sensor stddev must be >= 0");
    }
    for (const auto& p : cfg.pings) {
        unique_name(p.name);
        minutes_to_seconds(p.period_minutes, "ping period");
        if (p.ok_value.empty()) throw ConfigError("ping ok_value must be non-empty");
    }
    for (const auto& f : cfg.fans) {
        unique_name(f.name);
        minutes_to_seconds(f.mean_interval_minutes, "fan interval");
    }
    if (cfg.lighting) {
        if (cfg.lighting->lights < 1) throw ConfigError("lighting.lights must be >= 1");
        parse_hhmm(cfg.lighting->on_time);
        parse_hhmm(cfg.lighting->off_time);
        for (int j = 1; j <= cfg.lighting->lights; ++j) {
            unique_name("light" + std::to_string(j) + "_status");
            unique_name("light" + std::to_string(j) + "_ontime");
        }
    }
    if (cfg.feeding) {
        if (cfg.feeding->times.empty()) throw ConfigError("feeding.times must be non-empty");
        for (const auto& t : cfg.feeding->times) parse_hhmm(t);
        if (cfg.feeding->tanks.empty()) throw ConfigError("feeding.tanks must be non-empty");
        if (cfg.feeding->amounts.empty()) throw ConfigError("feeding.amounts must be non-empty");
    }
    if (needs_droid(cfg))
        for (int t : droid_tanks(cfg)) unique_name("feed_tank_" + std::to_string(t));
    for (const auto& n : cfg.noise) {
        unique_name(n.name);
        minutes_to_seconds(n.period_minutes, "noise period");
        if (n.values.empty()) throw ConfigError("noise values must be non-empty");
    }
    for (const auto& inj : cfg.injections) {
        if (!(inj.at_hours >= 0) || inj.at_hours >= cfg.duration_hours)
            throw ConfigError(inj.kind + " injection time " + csv::format_double(inj.at_hours) +
                              "h lies outside the scenario duration");
        if (inj.count < 1) throw ConfigError("injection count must be >= 1");
        if (inj.kind == "mutual_exclusion") {
            if (!cfg.feeding) throw ConfigError("mutual_exclusion needs a feeding schedule");
        } else if (inj.kind == "reboot") {
            if (!cfg.lighting) throw ConfigError("reboot needs a lighting schedule");
        } else if (inj.kind == "single_failure") {
            if (cfg.pings.empty()) throw ConfigError("single_failure needs a ping");
        } else if (inj.kind == "mass_duplicate") {
            if (cfg.sensors.empty()) throw ConfigError("mass_duplicate needs sensors");
            const std::int64_t period =
                minutes_to_seconds(cfg.sensors.front().period_minutes, "sensor period");
            for (const auto& s : cfg.sensors)
                if (minutes_to_seconds(s.period_minutes, "sensor period") != period)
                    throw ConfigError(
                        "mass_duplicate needs all sensors on one period so the duplicated "
                        "ranges vectorize identically");
            if (minutes_to_seconds(inj.spacing_minutes, "injection spacing") < period)
                throw ConfigError("mass_duplicate spacing must be >= the sensor period");
            if (kBurstOffsetSeconds + kBurstRounds >= period)
                throw ConfigError("sensor period too short for mass_duplicate alignment");
        } else if (inj.kind != "manual_operation") {
            throw ConfigError("unknown injection kind '" + inj.kind + "'");
        }
    }
}

}  // namespace

GeneratedLog generate(const ScenarioConfig& cfg) {
    check_config(cfg);
    const std::int64_t start = cfg.start_time;
    const std::int64_t end = start + std::llround(cfg.duration_hours * 3600.0);
    Emitter em;

    // One truth range per injection, except mass_duplicate which owns one
    // range per burst. Tags are dense indices into `tag_kinds`.
    std::vector<std::string> tag_kinds;
    std::vector<int> base_tag(cfg.injections.size());
    for (std::size_t i = 0; i < cfg.injections.size(); ++i) {
        base_tag[i] = int(tag_kinds.size());
        const int ranges = cfg.injections[i].kind == "mass_duplicate" ? cfg.injections[i].count : 1;
        tag_kinds.insert(tag_kinds.end(), std::size_t(ranges), cfg.injections[i].kind);
    }

    for (const auto& s : cfg.sensors) {
        auto g = stream(cfg.seed, "sensor/" + s.name);
        const std::int64_t period = minutes_to_seconds(s.period_minutes, "sensor period");
        for (std::int64_t t = start; t < end; t += period) {
            double v = s.mean + s.stddev * gauss(g);
            v = std::min(std::max(v, s.min_value), s.max_value);
            em.emit(t, kSensors, s.name, round_to(v, s.decimals), std::nullopt);
        }
    }

    for (const auto& p : cfg.pings) {
        auto g = stream(cfg.seed, "ping/" + p.name);
        const std::int64_t period = minutes_to_seconds(p.period_minutes, "ping period");
        std::int64_t offset = uniform_int(g, 0, 59);
        for (std::int64_t tick = start; tick < end; tick += period) {
            const std::int64_t t = tick + offset;
            if (t < end) em.emit(t, kPings, p.name, std::nullopt, p.ok_value);
            offset = std::clamp<std::int64_t>(offset + uniform_int(g, -2, 2), 0, period - 1);
        }
    }

    for (const auto& f : cfg.fans) {
        auto g = stream(cfg.seed, "fan/" + f.name);
        const std::int64_t mean = minutes_to_seconds(f.mean_interval_minutes, "fan interval");
        std::int64_t t = start + std::llround(uniform01(g) * double(mean));
        bool on = true;
        while (t < end) {
            em.emit(t, kFans, f.name, std::nullopt, on ? "on" : "off");
            on = !on;
            t += std::llround(double(mean) * (0.5 + uniform01(g)));
        }
    }

    if (cfg.lighting) {
        const auto& li = *cfg.lighting;
        auto g = stream(cfg.seed, "lighting");
        const int on_secs = parse_hhmm(li.on_time);
        const int off_secs = parse_hhmm(li.off_time);
        const std::int64_t first_day = start / kDaySeconds;
        const std::int64_t last_day = (end - 1) / kDaySeconds;
        for (std::int64_t day = first_day; day <= last_day; ++day) {
            std::int64_t t = day * kDaySeconds + on_secs + uniform_int(g, 0, 120);
            for (int j = 1; j <= li.lights; ++j) {
                if (t >= start && t < end)
                    em.emit(t, kLighting, "light" + std::to_string(j) + "_status", std::nullopt,
                            "on");
                t += uniform_int(g, 2, 10);
            }
            // Sunset: each lamp reports "off" and then re-announces the
            // scheduled on time, lamp by lamp.
            t = day * kDaySeconds + off_secs + uniform_int(g, 0, 120);
            for (int j = 1; j <= li.lights; ++j) {
                if (t >= start && t < end)
                    em.emit(t, kLighting, "light" + std::to_string(j) + "_status", std::nullopt,
                            "off");
                t += uniform_int(g, 1, 3);
                if (t >= start && t < end)
                    em.emit(t, kLighting, "light" + std::to_string(j) + "_ontime", std::nullopt,
                            hhmm(on_secs));
                t += uniform_int(g, 1, 3);
            }
        }
    }

    if (cfg.feeding) {
        const auto& fe = *cfg.feeding;
        auto g = stream(cfg.seed, "feeding");

        struct Session {
            std::int64_t base;
            int tag = -1;  // truth tag when a mutual-exclusion fault corrupts it
        };
        std::vector<Session> sessions;
        const std::int64_t first_day = start / kDaySeconds;
        const std::int64_t last_day = (end - 1) / kDaySeconds;
        for (std::int64_t day = first_day; day <= last_day; ++day)
            for (const auto& time : fe.times) {
                const std::int64_t base =
                    day * kDaySeconds + parse_hhmm(time) + uniform_int(g, 0, 60);
                if (base >= start && base + 600 < end) sessions.push_back({base, -1});
            }
        std::sort(sessions.begin(), sessions.end(),
                  [](const Session& a, const Session& b) { return a.base < b.base; });

        for (std::size_t idx = 0; idx < cfg.injections.size(); ++idx) {
            if (cfg.injections[idx].kind != "mutual_exclusion") continue;
            if (sessions.empty())
                throw ConfigError("mutual_exclusion needs at least one feeding session");
            const std::int64_t want =
                start + std::llround(cfg.injections[idx].at_hours * 3600.0);
            Session* best = nullptr;
            for (auto& s : sessions)
                if (!best || std::llabs(s.base - want) < std::llabs(best->base - want)) best = &s;
            if (best->tag != -1)
                throw ConfigError("two mutual_exclusion injections target the same session");
            best->tag = base_tag[idx];
        }

        for (const auto& session : sessions) {
            std::int64_t cursor = session.base;
            for (std::size_t vi = 0; vi < fe.tanks.size(); ++vi) {
                const bool corrupt = session.tag != -1 && vi + 1 == fe.tanks.size();
                const int tag = corrupt ? session.tag : -1;
                const std::string feed = "feed_tank_" + std::to_string(fe.tanks[vi]);
                em.emit(cursor, kFeeding, feed, choice(g, fe.amounts), std::nullopt, tag);
                cursor += uniform_int(g, 1, 4);
                em.emit(cursor, kFeeding, "droid_swing_h", choice(g, kSwingH), std::nullopt, tag);
                cursor += uniform_int(g, 1, 4);
                em.emit(cursor, kFeeding, "droid_swing_v", choice(g, kSwingV), std::nullopt, tag);
                cursor += uniform_int(g, 1, 4);
                em.emit(cursor, kFeeding, "droid_status", std::nullopt, "Operating", tag);
                cursor += uniform_int(g, 1, 4);
                em.emit(cursor, kFeeding, "droid_movediff", std::nullopt, choice(g, kMoveDiff),
                        tag);
                if (corrupt) {
                    // Another process grabs the droid inside the critical
                    // section and runs its own feed sequence; the closing
                    // Waiting never arrives.
                    cursor += uniform_int(g, 100, 200);
                    em.emit(cursor, kFeeding, "droid_lift_pos", choice(g, kLiftPos), std::nullopt,
                            tag);
                    cursor += uniform_int(g, 5, 15);
                    em.emit(cursor, kFeeding, feed, choice(g, fe.amounts), std::nullopt, tag);
                    cursor += uniform_int(g, 1, 4);
                    em.emit(cursor, kFeeding, "droid_swing_h", choice(g, kSwingH), std::nullopt,
                            tag);
                    cursor += uniform_int(g, 1, 4);
                    em.emit(cursor, kFeeding, "droid_swing_v", choice(g, kSwingV), std::nullopt,
                            tag);
                    cursor += uniform_int(g, 1, 4);
                    em.emit(cursor, kFeeding, "droid_movediff", std::nullopt, choice(g, kMoveDiff),
                            tag);
                    break;
                }
                cursor += uniform_int(g, 20, 50);
                em.emit(cursor, kFeeding, "droid_status", std::nullopt, "Waiting");
                cursor += uniform_int(g, 1, 4);
                em.emit(cursor, kFeeding, "droid_tank_pos", double(12 + 4 * vi), std::nullopt);
                cursor += uniform_int(g, 1, 4);
                em.emit(cursor, kFeeding, "droid_lift_pos", choice(g, kLiftPos), std::nullopt);
                cursor += uniform_int(g, 40, 90);
            }
        }
    }

    for (const auto& n : cfg.noise) {
        auto g = stream(cfg.seed, "noise/" + n.name);
        const std::int64_t period = minutes_to_seconds(n.period_minutes, "noise period");
        for (std::int64_t tick = start; tick < end; tick += period) {
            const std::int64_t t =
                tick + uniform_int(g, 0, std::min<std::int64_t>(period - 1, 299));
            if (t < end) em.emit(t, kNoise, n.name, std::nullopt, choice(g, n.values));
        }
    }

    for (std::size_t idx = 0; idx < cfg.injections.size(); ++idx) {
        const auto& inj = cfg.injections[idx];
        auto g = stream(cfg.seed, "injection/" + std::to_string(idx));
        const std::int64_t at = start + std::llround(inj.at_hours * 3600.0);
        if (inj.kind == "reboot") {
            // The controller restarts mid-day: lamps flick on and re-announce
            // their on times, highest lamp first.
            const auto& li = *cfg.lighting;
            const int on_secs = parse_hhmm(li.on_time);
            std::int64_t t = at;
            for (int j = li.lights; j >= 1; --j) {
                em.emit(t, kInjection, "light" + std::to_string(j) + "_status", std::nullopt, "on",
                        base_tag[idx]);
                t += uniform_int(g, 1, 3);
            }
            for (int j = li.lights; j >= 1; --j) {
                const int next_on = on_secs + 60 * int(uniform_int(g, -5, 5));
                em.emit(t, kInjection, "light" + std::to_string(j) + "_ontime", std::nullopt,
                        hhmm(next_on), base_tag[idx]);
                t += uniform_int(g, 1, 3);
            }
        } else if (inj.kind == "single_failure") {
            em.emit(at, kInjection, cfg.pings.front().name, std::nullopt, "Lost", base_tag[idx]);
        } else if (inj.kind == "manual_operation") {
            const std::vector<int> tanks = droid_tanks(cfg);
            std::int64_t t = at;
            em.emit(t, kInjection, "feed_tank_" + std::to_string(tanks.back()),
                    double(100 + 10 * uniform_int(g, 0, 40)), std::nullopt, base_tag[idx]);
            t += uniform_int(g, 2, 6);
            em.emit(t, kInjection, "droid_status", std::nullopt, "Operating", base_tag[idx]);
            t += uniform_int(g, 2, 6);
            em.emit(t, kInjection, "droid_movediff", std::nullopt, choice(g, kMoveDiff),
                    base_tag[idx]);
            t += uniform_int(g, 10, 30);
            em.emit(t, kInjection, "droid_status", std::nullopt, "Waiting", base_tag[idx]);
        } else if (inj.kind == "mass_duplicate") {
            const std::int64_t period =
                minutes_to_seconds(cfg.sensors.front().period_minutes, "sensor period");
            const std::int64_t spacing =
                minutes_to_seconds(inj.spacing_minutes, "injection spacing");
            for (int i = 0; i < inj.count; ++i) {
                // Anchor each burst at a fixed offset after a sensor tick.
                const std::int64_t want = at + std::int64_t(i) * spacing;
                const std::int64_t tick = start + (want - start) / period * period;
                const std::int64_t burst = tick + kBurstOffsetSeconds;
                if (burst + kBurstRounds >= end)
                    throw ConfigError("mass_duplicate overruns the scenario duration");
                for (int r = 0; r < kBurstRounds; ++r)
                    for (const auto& s : cfg.sensors)
                        em.emit(burst + r, kInjection, s.name, 0.0, std::nullopt,
                                base_tag[idx] + i);
            }
        }
    }

    // Order by time, then behavior rank, then emission order; assign ids.
    std::sort(em.events.begin(), em.events.end(), [](const Event& a, const Event& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.seq < b.seq;
    });

    GeneratedLog out;
    out.entries.reserve(em.events.size());
    std::map<int, std::pair<std::uint64_t, std::uint64_t>> ranges;
    std::uint64_t id = 0;
    for (Event& ev : em.events) {
        ++id;
        LogEntry e;
        e.id = id;
        e.timestamp = ev.t;
        e.command = std::move(ev.command);
        e.numeric_arg = ev.num;
        e.string_arg = std::move(ev.str);
        out.entries.push_back(std::move(e));
        if (ev.tag != -1) {
            auto [it, inserted] = ranges.emplace(ev.tag, std::make_pair(id, id));
            if (!inserted) it->second.second = id;
        }
    }

    for (const auto& [tag, range] : ranges)
        out.truth.push_back({tag_kinds[std::size_t(tag)], range.first, range.second});
    std::sort(out.truth.begin(), out.truth.end(),
              [](const TruthRange& a, const TruthRange& b) { return a.first_id < b.first_id; });

    for (std::size_t i = 1; i < out.truth.size(); ++i) {
        const auto& prev = out.truth[i - 1];
        const auto& cur = out.truth[i];
        if (cur.first_id <= prev.last_id ||
            cur.first_id - prev.last_id - 1 < kMinRangeGapEntries)
            throw ConfigError("injected ranges '" + prev.kind + "' and '" + cur.kind +
                              "' are closer than " + std::to_string(kMinRangeGapEntries) +
                              " entries apart; spread the injection times");
    }
    return out;
}

namespace {

// Tolerant time-of-day window with midnight wrap.
struct TodWindow {
    int begin, end;  // seconds of day

    bool contains(int tod) const {
        if (begin <= end) return tod >= begin && tod <= end;
        return tod >= begin || tod <= end;
    }
};

TodWindow around(int secs, int before, int after) {
    return {int(((secs - before) % kDaySeconds + kDaySeconds) % kDaySeconds),
            int((secs + after) % kDaySeconds)};
}

int time_of_day(std::int64_t t) {
    return int(((t % kDaySeconds) + kDaySeconds) % kDaySeconds);
}

}  // namespace

ValidationResult validate(const std::vector<LogEntry>& log, const GroundTruth& truth,
                          const ScenarioConfig& cfg) {
    ValidationResult res;

    std::vector<TodWindow> feed_windows;
    if (cfg.feeding)
        for (const auto& t : cfg.feeding->times)
            feed_windows.push_back(around(parse_hhmm(t), 300, 2400));
    std::optional<TodWindow> on_window, off_window;
    if (cfg.lighting) {
        on_window = around(parse_hhmm(cfg.lighting->on_time), 600, 900);
        off_window = around(parse_hhmm(cfg.lighting->off_time), 600, 900);
    }
    std::map<std::string, std::string> ping_ok;
    for (const auto& p : cfg.pings) ping_ok[p.name] = p.ok_value;
    std::set<std::string> sensor_names;
    for (const auto& s : cfg.sensors) sensor_names.insert(s.name);

    bool operating = false;
    auto flag = [&](const LogEntry& e, const char* kind, std::string detail) {
        res.violations.push_back({e.id, kind, std::move(detail)});
    };

    for (const LogEntry& e : log) {
        const int tod = time_of_day(e.timestamp);
        if (e.command == "droid_status" && e.string_arg) {
            if (*e.string_arg == "Operating") {
                if (operating) flag(e, "mutual_exclusion", "Operating inside an open section");
                operating = true;
            } else if (*e.string_arg == "Waiting") {
                operating = false;
            }
        } else if (glob_match("feed_tank_*", e.command)) {
            if (operating) {
                flag(e, "mutual_exclusion", "feed inside an Operating..Waiting section");
                operating = false;  // reset so one fault is reported once
            } else {
                bool scheduled = false;
                for (const auto& w : feed_windows) scheduled |= w.contains(tod);
                if (!scheduled) flag(e, "manual_operation", "feed outside every feeding window");
            }
        } else if (cfg.lighting && glob_match("light*_ontime", e.command)) {
            if (!off_window->contains(tod))
                flag(e, "reboot", "on-time announcement away from sunset");
        } else if (cfg.lighting && glob_match("light*_status", e.command) && e.string_arg) {
            const bool at_on = on_window->contains(tod);
            const bool at_off = off_window->contains(tod);
            if (*e.string_arg == "on" ? !at_on : !at_off)
                flag(e, "reboot", "lamp switched outside the schedule");
        } else if (auto it = ping_ok.find(e.command); it != ping_ok.end()) {
            if (e.string_arg && *e.string_arg != it->second)
                flag(e, "single_failure", "probe value '" + *e.string_arg + "'");
        } else if (sensor_names.count(e.command)) {
            if (e.numeric_arg && *e.numeric_arg == 0.0)
                flag(e, "mass_duplicate", "sensor reading of exactly 0");
        }
    }

    res.ok = true;
    std::vector<bool> hit(truth.size(), false);
    for (const Violation& v : res.violations) {
        const TruthRange* range = nullptr;
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (v.entry_id >= truth[i].first_id && v.entry_id <= truth[i].last_id) {
                range = &truth[i];
                if (truth[i].kind == v.kind) hit[i] = true;
                break;
            }
        if (!range) {
            res.diagnostics.push_back("entry " + std::to_string(v.entry_id) + " violates '" +
                                      v.kind + "' outside every truth range");
            res.ok = false;
        } else if (range->kind != v.kind) {
            res.diagnostics.push_back("entry " + std::to_string(v.entry_id) + " violates '" +
                                      v.kind + "' inside a '" + range->kind + "' range");
            res.ok = false;
        }
    }
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!hit[i]) {
            res.diagnostics.push_back("truth range '" + truth[i].kind + "' [" +
                                      std::to_string(truth[i].first_id) + ", " +
                                      std::to_string(truth[i].last_id) +
                                      "] contains no matching violation");
            res.ok = false;
        }
    return res;
}

namespace {

const toml::Table* find_table(const toml::Table& root, const std::string& key) {
    auto it = root.find(key);
    if (it == root.end()) return nullptr;
    if (!it->second.is_table()) throw ConfigError("'" + key + "' must be a table");
    return &it->second.as_table();
}

std::vector<const toml::Table*> find_table_array(const toml::Table& root, const std::string& key) {
    std::vector<const toml::Table*> out;
    auto it = root.find(key);
    if (it == root.end()) return out;
    if (!it->second.is_array()) throw ConfigError("'" + key + "' must be an array of tables");
    for (const auto& v : it->second.as_array()) {
        if (!v.is_table()) throw ConfigError("'" + key + "' must be an array of tables");
        out.push_back(&v.as_table());
    }
    return out;
}

std::string need_string(const toml::Table& t, const std::string& key, const std::string& ctx) {
    auto it = t.find(key);
    if (it == t.end()) throw ConfigError(ctx + " needs a '" + key + "' string");
    if (!it->second.is_string()) throw ConfigError(ctx + "." + key + " must be a string");
    return it->second.as_string();
}

double get_number(const toml::Table& t, const std::string& key, double fallback,
                  const std::string& ctx) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (!it->second.is_int() && !it->second.is_float())
        throw ConfigError(ctx + "." + key + " must be a number");
    return it->second.as_float();
}

std::string get_string(const toml::Table& t, const std::string& key, const std::string& fallback,
                       const std::string& ctx) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (!it->second.is_string()) throw ConfigError(ctx + "." + key + " must be a string");
    return it->second.as_string();
}

}  // namespace

ScenarioConfig load_scenario(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    const toml::Table root = toml::parse(buf.str());
    ScenarioConfig cfg;

    cfg.name = get_string(root, "name", "", "scenario");
    const std::string start = get_string(root, "start_time", "2014-06-06 00:00", "scenario");
    if (auto t = parse_timestamp(start))
        cfg.start_time = *t;
    else
        throw ConfigError("start_time '" + start + "' is not YYYY-MM-DD HH:MM[:SS]");
    cfg.duration_hours = get_number(root, "duration_hours", 24.0, "scenario");
    cfg.seed = std::uint64_t(get_number(root, "seed", 1.0, "scenario"));

    for (const auto* t : find_table_array(root, "sensor")) {
        SensorSpec s;
        s.name = need_string(*t, "name", "sensor");
        s.mean = get_number(*t, "mean", s.mean, "sensor");
        s.stddev = get_number(*t, "stddev", s.stddev, "sensor");
        s.period_minutes = get_number(*t, "period_minutes", s.period_minutes, "sensor");
        s.min_value = get_number(*t, "min_value", s.min_value, "sensor");
        s.max_value = get_number(*t, "max_value", s.max_value, "sensor");
        s.decimals = int(get_number(*t, "decimals", s.decimals, "sensor"));
        cfg.sensors.push_back(std::move(s));
    }
    for (const auto* t : find_table_array(root, "ping")) {
        PingSpec p;
        p.name = need_string(*t, "name", "ping");
        p.period_minutes = get_number(*t, "period_minutes", p.period_minutes, "ping");
        p.ok_value = get_string(*t, "ok_value", p.ok_value, "ping");
        cfg.pings.push_back(std::move(p));
    }
    for (const auto* t : find_table_array(root, "fan")) {
        FanSpec f;
        f.name = need_string(*t, "name", "fan");
        f.mean_interval_minutes =
            get_number(*t, "mean_interval_minutes", f.mean_interval_minutes, "fan");
        cfg.fans.push_back(std::move(f));
    }
    if (const auto* t = find_table(root, "lighting")) {
        LightingSpec li;
        li.lights = int(get_number(*t, "lights", li.lights, "lighting"));
        li.on_time = get_string(*t, "on_time", li.on_time, "lighting");
        li.off_time = get_string(*t, "off_time", li.off_time, "lighting");
        cfg.lighting = li;
    }
    if (const auto* t = find_table(root, "feeding")) {
        FeedingSpec fe;
        auto times = t->find("times");
        if (times == t->end() || !times->second.is_array())
            throw ConfigError("feeding needs a 'times' array");
        fe.times.clear();
        for (const auto& v : times->second.as_array()) {
            if (!v.is_string()) throw ConfigError("feeding.times must hold HH:MM strings");
            fe.times.push_back(v.as_string());
        }
        if (auto tanks = t->find("tanks"); tanks != t->end()) {
            if (!tanks->second.is_array()) throw ConfigError("feeding.tanks must be an array");
            fe.tanks.clear();
            for (const auto& v : tanks->second.as_array()) {
                if (!v.is_int()) throw ConfigError("feeding.tanks must hold integers");
                fe.tanks.push_back(int(v.as_int()));
            }
        }
        if (auto amounts = t->find("amounts"); amounts != t->end()) {
            if (!amounts->second.is_array()) throw ConfigError("feeding.amounts must be an array");
            fe.amounts.clear();
            for (const auto& v : amounts->second.as_array()) {
                if (!v.is_int() && !v.is_float())
                    throw ConfigError("feeding.amounts must hold numbers");
                fe.amounts.push_back(v.as_float());
            }
        }
        cfg.feeding = std::move(fe);
    }
    for (const auto* t : find_table_array(root, "noise")) {
        NoiseSpec n;
        n.name = need_string(*t, "name", "noise");
        n.period_minutes = get_number(*t, "period_minutes", n.period_minutes, "noise");
        auto values = t->find("values");
        if (values == t->end() || !values->second.is_array())
            throw ConfigError("noise needs a 'values' array");
        for (const auto& v : values->second.as_array()) {
            if (!v.is_string()) throw ConfigError("noise.values must hold strings");
            n.values.push_back(v.as_string());
        }
        cfg.noise.push_back(std::move(n));
    }
    for (const auto* t : find_table_array(root, "injection")) {
        InjectionSpec inj;
        inj.kind = need_string(*t, "kind", "injection");
        inj.at_hours = get_number(*t, "at_hours", inj.at_hours, "injection");
        inj.count = int(get_number(*t, "count", inj.count, "injection"));
        inj.spacing_minutes = get_number(*t, "spacing_minutes", inj.spacing_minutes, "injection");
        cfg.injections.push_back(std::move(inj));
    }
    check_config(cfg);
    return cfg;
}

std::string class_map_csv(const ScenarioConfig& cfg) {
    std::map<std::string, const char*> rows;
    for (const auto& s : cfg.sensors) rows[s.name] = to_string(CommandClass::SensorValue);
    for (const auto& p : cfg.pings) rows[p.name] = to_string(CommandClass::NetworkStatus);
    for (const auto& f : cfg.fans) rows[f.name] = to_string(CommandClass::ActuatorDrive);
    if (cfg.lighting)
        for (int j = 1; j <= cfg.lighting->lights; ++j) {
            rows["light" + std::to_string(j) + "_status"] = to_string(CommandClass::ActuatorDrive);
            rows["light" + std::to_string(j) + "_ontime"] = to_string(CommandClass::ActuatorDrive);
        }
    if (needs_droid(cfg)) {
        for (int t : droid_tanks(cfg))
            rows["feed_tank_" + std::to_string(t)] = to_string(CommandClass::ActuatorDrive);
        for (const char* name : {"droid_swing_h", "droid_swing_v", "droid_status",
                                 "droid_movediff", "droid_tank_pos", "droid_lift_pos"})
            rows[name] = to_string(CommandClass::ActuatorDrive);
    }
    for (const auto& n : cfg.noise) rows[n.name] = to_string(CommandClass::Other);

    std::string out;
    for (const auto& [name, cls] : rows) {
        out += name;
        out += ',';
        out += cls;
        out += '\n';
    }
    return out;
}

std::string truth_to_json(const GroundTruth& truth) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : truth)
        arr.push_back({{"kind", r.kind}, {"first_id", r.first_id}, {"last_id", r.last_id}});
    return arr.dump(2) + "\n";
}

GroundTruth truth_from_json(std::istream& in) {
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("truth file is not valid JSON: ") + e.what());
    }
    if (!arr.is_array()) throw ConfigError("truth file must hold a JSON array");
    GroundTruth truth;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("kind") || !item.contains("first_id") ||
            !item.contains("last_id"))
            throw ConfigError("truth entries need kind, first_id, last_id");
        truth.push_back({item["kind"].get<std::string>(), item["first_id"].get<std::uint64_t>(),
                         item["last_id"].get<std::uint64_t>()});
    }
    return truth;
}

}  // namespace lofscan::synth
