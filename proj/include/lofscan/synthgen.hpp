#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lofscan/log_model.hpp"

namespace lofscan::synth {

// Periodic numeric reading (water temperature, humidity, ...). Values are
// Gaussian around `mean`, clamped to [min_value, max_value] and rounded to
// `decimals` digits. A rounded baseline value is never exactly 0; the zero
// value is reserved for the mass-duplicate injection.
struct SensorSpec {
    std::string name;
    double mean = 25.0;
    double stddev = 0.5;
    double period_minutes = 10.0;
    double min_value = 0.1;
    double max_value = 1e9;
    int decimals = 1;
};

// Periodic reachability probe; emits `ok_value` while healthy.
struct PingSpec {
    std::string name;
    double period_minutes = 30.0;
    std::string ok_value = "Alive";
};

// On/off toggling at randomized intervals around the mean.
struct FanSpec {
    std::string name;
    double mean_interval_minutes = 90.0;
};

// `lights` lamps switch on each morning; at sunset each lamp emits "off"
// followed by its next-morning `light<i>_ontime` announcement.
struct LightingSpec {
    int lights = 3;
    std::string on_time = "06:45";   // HH:MM, time of day
    std::string off_time = "21:30";  // HH:MM
};

// Scheduled droid feeding. Each session visits the tanks in order; a visit is
// feed, swing, an Operating..Waiting critical section, then position reports.
struct FeedingSpec {
    std::vector<std::string> times;  // HH:MM per day
    std::vector<int> tanks{1, 2};
    std::vector<double> amounts{2, 4};  // drawn per feed
};

// Chatter classified Other (filtered out by the default pipeline config).
struct NoiseSpec {
    std::string name;
    double period_minutes = 15.0;
    std::vector<std::string> values;  // string argument vocabulary
};

struct InjectionSpec {
    std::string kind;  // mutual_exclusion | reboot | single_failure |
                       // manual_operation | mass_duplicate
    double at_hours = 0.0;
    int count = 1;                  // mass_duplicate: number of ranges
    double spacing_minutes = 30.0;  // mass_duplicate: gap between ranges
};

struct ScenarioConfig {
    std::string name;
    std::int64_t start_time = 0;  // epoch seconds
    double duration_hours = 24.0;
    std::uint64_t seed = 1;
    std::vector<SensorSpec> sensors;
    std::vector<PingSpec> pings;
    std::vector<FanSpec> fans;
    std::optional<LightingSpec> lighting;
    std::optional<FeedingSpec> feeding;
    std::vector<NoiseSpec> noise;
    std::vector<InjectionSpec> injections;
};

struct TruthRange {
    std::string kind;
    std::uint64_t first_id = 0;
    std::uint64_t last_id = 0;
};

using GroundTruth = std::vector<TruthRange>;

struct GeneratedLog {
    std::vector<LogEntry> entries;  // ids 1..n, sorted by (timestamp, id)
    GroundTruth truth;              // sorted by first_id
};

// Deterministic for a given config (including its seed). Throws ConfigError
// on invalid scenarios: injections outside the duration, injections needing a
// behavior the scenario lacks, or injected ranges closer than two default
// windows (22 entries) to each other.
GeneratedLog generate(const ScenarioConfig& cfg);

// Parses a scenario TOML document; see scenarios/ for the accepted keys.
ScenarioConfig load_scenario(std::istream& in);

// Command classification covering everything the scenario can emit, as
// `command,class` CSV rows.
std::string class_map_csv(const ScenarioConfig& cfg);

struct Violation {
    std::uint64_t entry_id = 0;
    std::string kind;
    std::string detail;
};

struct ValidationResult {
    bool ok = false;
    std::vector<Violation> violations;
    std::vector<std::string> diagnostics;  // why ok is false
};

// Replays the log against the scenario's baseline rules (critical sections,
// schedules, healthy probe values, nonzero sensor readings). ok means every
// truth range contains a violation of its kind and no violation falls outside
// the truth ranges.
ValidationResult validate(const std::vector<LogEntry>& log, const GroundTruth& truth,
                          const ScenarioConfig& cfg);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(std::istream& in);

}  // namespace lofscan::synth
