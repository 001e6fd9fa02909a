#include "lofscan/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lofscan/csv.hpp"
#include "lofscan/featurize.hpp"
#include "lofscan/lof.hpp"

namespace lofscan {

namespace {

void check_config(const PipelineConfig& cfg) {
    if (cfg.chunk_size < 1) throw ConfigError("chunk size must be >= 1");
    if (cfg.window < 1) throw ConfigError("window size must be >= 1");
    if (cfg.window > cfg.chunk_size) throw ConfigError("window size must be <= chunk size");
    if (cfg.k < 1) throw ConfigError("k must be >= 1");
    if (cfg.top_n < 1) throw ConfigError("top_n must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (cfg.input_path.empty()) throw ConfigError("input path is required");
    if (cfg.classes_path.empty()) throw ConfigError("classes path is required");
    if (cfg.out_dir.empty()) throw ConfigError("output directory is required");
}

// Raw source lines ride along with the entries so reports can quote the log
// verbatim.
struct ChunkInput {
    std::size_t index = 0;
    std::span<const LogEntry> entries;
    std::span<const std::string> raw_lines;
};

ChunkResult process_chunk(const ChunkInput& in, const PipelineConfig& cfg,
                          const CommandClassMap& classes, std::size_t lof_threads,
                          std::vector<std::string>& warnings, std::mutex& warn_mutex) {
    ChunkResult result;
    result.chunk_index = in.index;

    std::vector<LogEntry> kept;
    std::vector<const std::string*> kept_lines;
    for (std::size_t i = 0; i < in.entries.size(); ++i)
        if (!is_excluded(in.entries[i], cfg.filter, classes)) {
            kept.push_back(in.entries[i]);
            kept_lines.push_back(&in.raw_lines[i]);
        }

    if (kept.size() < cfg.window) {
        result.skipped = true;
        std::lock_guard lock(warn_mutex);
        warnings.push_back("chunk " + std::to_string(in.index) + ": " +
                           std::to_string(kept.size()) +
                           " entries after filtering, fewer than the window size " +
                           std::to_string(cfg.window) + "; skipped");
        return result;
    }

    const CommandSchema schema = build_schema(kept);
    EntryMatrix matrix = vectorize_chunk(kept, schema);
    const NormalizationStats stats = compute_norm_stats(matrix);
    normalize(matrix, stats);
    WindowSet ws = window(matrix, cfg.window);

    if (cfg.dump_vectors) {
        const auto dir = std::filesystem::path(cfg.out_dir);
        std::ofstream ev(dir / ("chunk_" + std::to_string(in.index) + "_entry_vectors.csv"));
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            ev << matrix.entry_ids[i];
            for (double v : matrix.row(i)) ev << ',' << csv::format_double(v);
            ev << '\n';
        }
        std::ofstream wv(dir / ("chunk_" + std::to_string(in.index) + "_window_vectors.csv"));
        for (std::size_t i = 0; i < ws.count; ++i) {
            wv << ws.first_entry_id(i);
            for (double v : ws.row(i)) wv << ',' << csv::format_double(v);
            wv << '\n';
        }
    }

    PointSet points;
    points.n = ws.count;
    points.d = ws.window_dim();
    points.values = std::move(ws.values);

    const NeighborhoodTable table = knn(points, cfg.k, lof_threads);
    const LofScores scores = lof_from_table(table);

    result.lof = scores.lof;
    result.window_first_ids.resize(ws.count);
    for (std::size_t i = 0; i < ws.count; ++i) result.window_first_ids[i] = ws.first_entry_id(i);

    // Rank windows by score, ties to the lower index.
    std::vector<std::size_t> order(ws.count);
    for (std::size_t i = 0; i < ws.count; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.lof[a] != scores.lof[b] ? scores.lof[a] > scores.lof[b] : a < b;
    });

    std::vector<std::size_t> picked;
    for (std::size_t idx : order) {
        if (picked.size() >= cfg.top_n) break;
        if (cfg.suppress_overlap) {
            bool overlaps = false;
            for (std::size_t other : picked)
                overlaps |= (idx > other ? idx - other : other - idx) < cfg.window;
            if (overlaps) continue;
        }
        picked.push_back(idx);
    }

    auto window_entry_ids = [&](std::size_t w) {
        return std::vector<std::uint64_t>(ws.entry_ids.begin() + std::ptrdiff_t(w),
                                          ws.entry_ids.begin() + std::ptrdiff_t(w + cfg.window));
    };
    auto window_lines = [&](std::size_t w) {
        std::vector<std::string> lines;
        lines.reserve(cfg.window);
        for (std::size_t i = w; i < w + cfg.window; ++i) lines.push_back(*kept_lines[i]);
        return lines;
    };

    for (std::size_t idx : picked) {
        OutlierRecord rec;
        rec.chunk_index = in.index;
        rec.window_index = idx;
        rec.lof = scores.lof[idx];
        rec.entry_ids = window_entry_ids(idx);
        rec.entries = window_lines(idx);
        for (const Neighbor& nb : table.neighbors[idx]) {
            NeighborWindow nw;
            nw.window_index = nb.index;
            nw.distance = nb.distance;
            nw.entry_ids = window_entry_ids(nb.index);
            nw.entries = window_lines(nb.index);
            rec.neighborhood.push_back(std::move(nw));
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

void write_chunk_files(const ChunkResult& r, const std::string& out_dir) {
    const auto dir = std::filesystem::path(out_dir);
    const std::string stem = "chunk_" + std::to_string(r.chunk_index);

    std::ofstream ts(dir / (stem + "_timeseries.csv"), std::ios::binary);
    if (!ts) throw ConfigError("cannot write into output directory '" + out_dir + "'");
    emit_timeseries(r.window_first_ids, r.lof, ts);

    std::ofstream js(dir / (stem + "_outliers.json"), std::ios::binary);
    emit_report_json(r.records, js);

    std::ofstream txt(dir / (stem + "_outliers.txt"), std::ios::binary);
    emit_report_text(r.records, txt);
}

nlohmann::json record_to_json(const OutlierRecord& rec) {
    nlohmann::json j;
    j["chunk_index"] = rec.chunk_index;
    j["window_index"] = rec.window_index;
    if (std::isinf(rec.lof)) {
        j["lof"] = nullptr;
        j["lof_infinite"] = true;  // flagged maximal outlier
    } else {
        j["lof"] = rec.lof;
        j["lof_infinite"] = false;
    }
    j["first_entry_id"] = rec.entry_ids.empty() ? 0 : rec.entry_ids.front();
    j["entry_ids"] = rec.entry_ids;
    j["entries"] = rec.entries;
    j["neighborhood"] = nlohmann::json::array();
    for (const auto& nb : rec.neighborhood) {
        nlohmann::json n;
        n["window_index"] = nb.window_index;
        n["distance"] = nb.distance;
        n["first_entry_id"] = nb.entry_ids.empty() ? 0 : nb.entry_ids.front();
        n["entry_ids"] = nb.entry_ids;
        n["entries"] = nb.entries;
        j["neighborhood"].push_back(std::move(n));
    }
    return j;
}

}  // namespace

RunReport run(const PipelineConfig& cfg) {
    check_config(cfg);

    std::ifstream classes_in(cfg.classes_path);
    if (!classes_in) throw ConfigError("cannot open classes file '" + cfg.classes_path + "'");
    const CommandClassMap classes = load_class_map(classes_in);

    std::ifstream log_in(cfg.input_path, std::ios::binary);
    if (!log_in) throw ConfigError("cannot open input file '" + cfg.input_path + "'");
    ParseOptions popts;
    popts.lenient = cfg.lenient_parse;
    popts.keep_raw_lines = true;
    const ParsedLog log = parse_log(log_in, popts);

    std::filesystem::create_directories(cfg.out_dir);

    RunReport report;
    report.warnings = log.warnings;

    const auto chunks = chunk_entries(log.entries, cfg.chunk_size);
    std::vector<ChunkInput> inputs;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const std::size_t offset = std::size_t(chunks[i].data() - log.entries.data());
        inputs.push_back({i, chunks[i],
                          std::span<const std::string>(log.raw_lines.data() + offset,
                                                       chunks[i].size())});
    }

    report.chunks.resize(inputs.size());
    std::mutex warn_mutex;

    // Chunks fan out across workers; LOF threads split what is left over.
    const std::size_t workers = std::max<std::size_t>(
        1, std::min({cfg.threads, inputs.size(), std::size_t(64)}));
    const std::size_t lof_threads = std::max<std::size_t>(1, cfg.threads / workers);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) break;
            try {
                report.chunks[i] =
                    process_chunk(inputs[i], cfg, classes, lof_threads, report.warnings,
                                  warn_mutex);
            } catch (const std::exception& e) {
                report.chunks[i].chunk_index = i;
                report.chunks[i].failed = true;
                report.chunks[i].error = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const ChunkResult& r : report.chunks) {
        write_chunk_files(r, cfg.out_dir);
        if (r.failed) report.exit_code = 1;
    }
    return report;
}

void emit_timeseries(std::span<const std::uint64_t> window_first_ids,
                     std::span<const double> lof, std::ostream& out) {
    out << "window_first_entry_id,lof\n";
    for (std::size_t i = 0; i < window_first_ids.size(); ++i)
        out << window_first_ids[i] << ',' << csv::format_double(lof[i]) << '\n';
}

void emit_report_json(const std::vector<OutlierRecord>& records, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : records) arr.push_back(record_to_json(rec));
    out << arr.dump(2) << '\n';
}

std::vector<OutlierRecord> report_from_json(std::istream& in) {
    nlohmann::json arr;
    in >> arr;
    if (!arr.is_array()) throw InputError("report must hold a JSON array");
    std::vector<OutlierRecord> records;
    for (const auto& j : arr) {
        OutlierRecord rec;
        rec.chunk_index = j.at("chunk_index").get<std::size_t>();
        rec.window_index = j.at("window_index").get<std::size_t>();
        rec.lof = j.at("lof_infinite").get<bool>() ? std::numeric_limits<double>::infinity()
                                                   : j.at("lof").get<double>();
        rec.entry_ids = j.at("entry_ids").get<std::vector<std::uint64_t>>();
        rec.entries = j.at("entries").get<std::vector<std::string>>();
        for (const auto& n : j.at("neighborhood")) {
            NeighborWindow nw;
            nw.window_index = n.at("window_index").get<std::size_t>();
            nw.distance = n.at("distance").get<double>();
            nw.entry_ids = n.at("entry_ids").get<std::vector<std::uint64_t>>();
            nw.entries = n.at("entries").get<std::vector<std::string>>();
            rec.neighborhood.push_back(std::move(nw));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void emit_report_text(const std::vector<OutlierRecord>& records, std::ostream& out) {
    for (std::size_t r = 0; r < records.size(); ++r) {
        const OutlierRecord& rec = records[r];
        out << "Outlier " << r + 1 << " of " << records.size() << "  window " << rec.window_index
            << "  first entry "
            << (rec.entry_ids.empty() ? 0 : rec.entry_ids.front()) << "  lof "
            << csv::format_double(rec.lof) << '\n';
        if (rec.neighborhood.empty()) {
            out << "  (no neighborhood)\n\n";
            continue;
        }
        const NeighborWindow& nearest = rec.neighborhood.front();
        out << "  neighborhood size " << rec.neighborhood.size() << "; nearest window "
            << nearest.window_index << " at distance " << csv::format_double(nearest.distance)
            << '\n';

        std::size_t width = 14;  // "outlier window" header
        for (const std::string& line : rec.entries) width = std::max(width, line.size());
        auto pad = [&](const std::string& s) {
            out << "  " << s;
            for (std::size_t i = s.size(); i < width; ++i) out << ' ';
        };
        pad("outlier window");
        out << " | nearest neighborhood window\n";
        for (std::size_t i = 0; i < rec.entries.size(); ++i) {
            pad(rec.entries[i]);
            out << " | ";
            if (i < nearest.entries.size()) out << nearest.entries[i];
            out << '\n';
        }
        out << '\n';
    }
}

}  // namespace lofscan
