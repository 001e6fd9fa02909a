#include "lofscan/featurize.hpp"

#include <cmath>
#include <cstring>

namespace lofscan {

CommandSchema build_schema(std::span<const LogEntry> entries) {
    CommandSchema schema;
    for (const LogEntry& e : entries) schema.index.emplace(e.command, 0);
    std::size_t ordinal = 0;
    for (auto& [command, block] : schema.index) block = ordinal++;  // map iterates sorted
    return schema;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::size_t hash_slot(std::string_view s) { return fnv1a64(s) % 4; }

std::vector<double> vectorize_entry(const LogEntry& e, const CommandSchema& schema,
                                    LastSeenMap& last_seen) {
    auto it = schema.index.find(e.command);
    if (it == schema.index.end())
        throw InputError("command '" + e.command + "' is not in the schema");
    std::vector<double> v(schema.dimension(), 0.0);

    auto [seen, inserted] = last_seen.try_emplace(e.command, e.timestamp);
    if (!inserted) {
        v[0] = double(e.timestamp - seen->second) * 1000.0;
        seen->second = e.timestamp;
    }

    const std::size_t base = 1 + 5 * it->second;
    if (e.numeric_arg)
        v[base] = *e.numeric_arg;
    else if (e.string_arg)
        v[base + 1 + hash_slot(*e.string_arg)] = 1.0;
    return v;
}

EntryMatrix vectorize_chunk(std::span<const LogEntry> entries, const CommandSchema& schema) {
    EntryMatrix m;
    m.dim = schema.dimension();
    m.entry_ids.reserve(entries.size());
    m.values.reserve(entries.size() * m.dim);
    LastSeenMap last_seen;
    for (const LogEntry& e : entries) {
        const std::vector<double> v = vectorize_entry(e, schema, last_seen);
        m.entry_ids.push_back(e.id);
        m.values.insert(m.values.end(), v.begin(), v.end());
    }
    return m;
}

NormalizationStats compute_norm_stats(const EntryMatrix& m) {
    if (m.size() == 0) throw InputError("cannot compute statistics of an empty matrix");
    const std::size_t d = m.dim;
    NormalizationStats stats;
    stats.mean.assign(d, 0.0);
    std::vector<double> m2(d, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {  // Welford, per component
        const auto row = m.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = row[j] - stats.mean[j];
            stats.mean[j] += delta / double(i + 1);
            m2[j] += delta * (row[j] - stats.mean[j]);
        }
    }
    stats.stddev.resize(d);
    for (std::size_t j = 0; j < d; ++j) stats.stddev[j] = std::sqrt(m2[j] / double(m.size()));
    return stats;
}

void normalize(EntryMatrix& m, const NormalizationStats& stats) {
    if (stats.mean.size() != m.dim || stats.stddev.size() != m.dim)
        throw InputError("statistics dimension does not match the matrix");
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < m.dim; ++j)
            row[j] = stats.stddev[j] == 0.0 ? 0.0 : (row[j] - stats.mean[j]) / stats.stddev[j];
    }
}

WindowSet window(const EntryMatrix& m, std::size_t w) {
    if (w < 1) throw ConfigError("window size must be >= 1");
    if (m.size() < w)
        throw ConfigError("matrix has " + std::to_string(m.size()) +
                          " rows, fewer than the window size " + std::to_string(w));
    WindowSet ws;
    ws.window = w;
    ws.entry_dim = m.dim;
    ws.count = m.size() - w + 1;
    ws.entry_ids = m.entry_ids;
    ws.values.resize(ws.count * ws.window_dim());
    // Rows are contiguous, so window i is one block of the source matrix.
    for (std::size_t i = 0; i < ws.count; ++i)
        std::memcpy(ws.values.data() + i * ws.window_dim(), m.values.data() + i * m.dim,
                    ws.window_dim() * sizeof(double));
    return ws;
}

}  // namespace lofscan
