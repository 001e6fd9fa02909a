#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lofscan/log_model.hpp"

namespace lofscan {

// Maps each distinct command of a chunk to a column block. Blocks are
// assigned in lexicographic command order, so the layout is a pure function
// of the chunk's command set.
struct CommandSchema {
    std::map<std::string, std::size_t, std::less<>> index;  // command -> block ordinal

    // One leading inter-arrival component plus a 5-wide block per command:
    // block slot 0 holds a numeric argument, slots 1..4 one-hot a hashed
    // string argument.
    std::size_t dimension() const { return 1 + 5 * index.size(); }
};

CommandSchema build_schema(std::span<const LogEntry> entries);

std::uint64_t fnv1a64(std::string_view s);

// Which of the four one-hot slots a string argument lands in.
std::size_t hash_slot(std::string_view s);

// Row-major matrix of entry vectors; all rows share one dimension.
struct EntryMatrix {
    std::size_t dim = 0;
    std::vector<std::uint64_t> entry_ids;
    std::vector<double> values;  // size() * dim

    std::size_t size() const { return entry_ids.size(); }
    std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

// Tracks the previous timestamp per command so component 0 can carry the gap
// to the previous entry of the same command, in milliseconds (0 for a
// command's first entry).
using LastSeenMap = std::map<std::string, std::int64_t, std::less<>>;

// Throws InputError when the command is not in the schema.
std::vector<double> vectorize_entry(const LogEntry& e, const CommandSchema& schema,
                                    LastSeenMap& last_seen);

EntryMatrix vectorize_chunk(std::span<const LogEntry> entries, const CommandSchema& schema);

struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population form, divisor n
};

NormalizationStats compute_norm_stats(const EntryMatrix& m);

// In place: (x - mean) / stddev per component; components with stddev 0 are
// set to 0.
void normalize(EntryMatrix& m, const NormalizationStats& stats);

// Sliding windows, stride 1: window i is rows [i, i+w) concatenated.
struct WindowSet {
    std::size_t window = 0;      // w
    std::size_t entry_dim = 0;   // d
    std::size_t count = 0;       // rows(m) - w + 1
    std::vector<std::uint64_t> entry_ids;  // ids of the chunk's rows; window i
                                           // covers entry_ids[i .. i+w)
    std::vector<double> values;            // count * (w * entry_dim)

    std::size_t window_dim() const { return window * entry_dim; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * window_dim(), window_dim()};
    }
    std::uint64_t first_entry_id(std::size_t i) const { return entry_ids[i]; }
};

// Throws ConfigError when w < 1 or the matrix has fewer than w rows.
WindowSet window(const EntryMatrix& m, std::size_t w);

}  // namespace lofscan
