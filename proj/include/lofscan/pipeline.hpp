#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lofscan/log_model.hpp"

namespace lofscan {

struct PipelineConfig {
    std::string input_path;
    std::string classes_path;
    std::string out_dir;
    std::size_t chunk_size = 100000;
    std::size_t window = 11;
    std::size_t k = 20;
    std::size_t top_n = 5;
    FilterConfig filter;
    bool suppress_overlap = false;  // skip top windows sharing entries with a picked one
    bool dump_vectors = false;      // also write normalized entry/window matrices
    bool lenient_parse = false;
    std::size_t threads = 1;
};

struct NeighborWindow {
    std::size_t window_index = 0;
    double distance = 0.0;
    std::vector<std::uint64_t> entry_ids;
    std::vector<std::string> entries;  // verbatim source lines
};

struct OutlierRecord {
    std::size_t chunk_index = 0;
    std::size_t window_index = 0;
    double lof = 0.0;  // +infinity for flagged maximal outliers
    std::vector<std::uint64_t> entry_ids;
    std::vector<std::string> entries;       // verbatim source lines
    std::vector<NeighborWindow> neighborhood;  // exactly the window's k-neighborhood
};

struct ChunkResult {
    std::size_t chunk_index = 0;
    bool skipped = false;  // fewer entries than one window after filtering
    bool failed = false;
    std::string error;
    std::vector<std::uint64_t> window_first_ids;  // parallel to lof
    std::vector<double> lof;
    std::vector<OutlierRecord> records;  // sorted by lof descending
};

struct RunReport {
    std::vector<ChunkResult> chunks;
    std::vector<std::string> warnings;
    int exit_code = 0;  // 0 ok, 1 some chunk failed, 2 config/input error
};

// Full batch: parse, chunk, and per chunk filter -> schema -> vectorize ->
// normalize -> window -> LOF -> top_n records; writes per-chunk report files
// into cfg.out_dir. Throws ConfigError/ParseError/InputError for problems
// that precede chunk processing (exit code 2 at the CLI); per-chunk failures
// are recorded and yield exit code 1.
RunReport run(const PipelineConfig& cfg);

// Two-column CSV `window_first_entry_id,lof`, in window (= id) order.
void emit_timeseries(std::span<const std::uint64_t> window_first_ids,
                     std::span<const double> lof, std::ostream& out);

// JSON array of the records.
void emit_report_json(const std::vector<OutlierRecord>& records, std::ostream& out);
std::vector<OutlierRecord> report_from_json(std::istream& in);

// Analyst-facing text: each outlier's entries beside its nearest neighborhood.
void emit_report_text(const std::vector<OutlierRecord>& records, std::ostream& out);

}  // namespace lofscan
