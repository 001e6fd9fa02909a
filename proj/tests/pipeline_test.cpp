#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lofscan/errors.hpp"
#include "lofscan/pipeline.hpp"
#include "lofscan/synthgen.hpp"

using namespace lofscan;
namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;

    explicit Workspace(const std::string& name) : dir(fs::path("pipeline_test_tmp") / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    fs::path file(const std::string& name) const { return dir / name; }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream out(file(name), std::ios::binary);
        out << text;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file " << p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

synth::ScenarioConfig small_scenario() {
    synth::ScenarioConfig cfg;
    cfg.name = "pipe";
    cfg.start_time = parse_timestamp("2014-06-06 00:00").value();
    cfg.duration_hours = 8;
    cfg.seed = 3;
    cfg.sensors = {
        {.name = "air", .mean = 26.0, .stddev = 0.4, .period_minutes = 10},
        {.name = "water1", .mean = 25.0, .stddev = 0.3, .period_minutes = 10},
    };
    cfg.pings = {{.name = "target_10_status", .period_minutes = 30}};
    cfg.fans = {{.name = "fan1_status", .mean_interval_minutes = 60}};
    cfg.noise = {{.name = "location_x", .period_minutes = 20, .values = {"5", "6"}}};
    synth::InjectionSpec inj;
    inj.kind = "single_failure";
    inj.at_hours = 5.0;
    cfg.injections = {inj};
    return cfg;
}

// Writes the scenario's log and class map; returns entry count and noise count.
std::pair<std::size_t, std::size_t> materialize(const Workspace& ws,
                                                const synth::ScenarioConfig& cfg) {
    const auto log = synth::generate(cfg);
    std::ostringstream out;
    serialize_entries(log.entries, out);
    ws.write("log.csv", out.str());
    ws.write("classes.csv", synth::class_map_csv(cfg));
    std::size_t noise = 0;
    for (const auto& e : log.entries)
        if (e.command.starts_with("location_")) ++noise;
    return {log.entries.size(), noise};
}

PipelineConfig base_run(const Workspace& ws, const std::string& out_name) {
    PipelineConfig cfg;
    cfg.input_path = ws.file("log.csv").string();
    cfg.classes_path = ws.file("classes.csv").string();
    cfg.out_dir = ws.file(out_name).string();
    cfg.window = 5;
    cfg.k = 3;
    cfg.top_n = 4;
    return cfg;
}

std::vector<std::pair<std::uint64_t, std::string>> read_timeseries(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), "missing file " << p.string());
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "window_first_entry_id,lof");
    std::vector<std::pair<std::uint64_t, std::string>> rows;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        rows.emplace_back(std::stoull(line.substr(0, comma)), line.substr(comma + 1));
    }
    return rows;
}

}  // namespace

TEST_CASE("run produces ranked reports and a full score series") {
    Workspace ws("single_chunk");
    const auto [total, noise] = materialize(ws, small_scenario());
    const auto cfg = base_run(ws, "out");
    const auto report = run(cfg);

    CHECK(report.exit_code == 0);
    REQUIRE(report.chunks.size() == 1);
    const auto& chunk = report.chunks[0];
    CHECK(!chunk.skipped);
    CHECK(!chunk.failed);

    const std::size_t kept = total - noise;
    const std::size_t windows = kept - cfg.window + 1;
    CHECK(chunk.lof.size() == windows);
    CHECK(chunk.window_first_ids.size() == windows);

    // Records are the top_n windows by score, descending.
    REQUIRE(chunk.records.size() == cfg.top_n);
    for (std::size_t i = 1; i < chunk.records.size(); ++i)
        CHECK(chunk.records[i - 1].lof >= chunk.records[i].lof);
    for (const auto& rec : chunk.records) {
        CHECK(rec.entry_ids.size() == cfg.window);
        CHECK(rec.entries.size() == cfg.window);
        CHECK(rec.neighborhood.size() >= cfg.k);
        for (const auto& nb : rec.neighborhood) {
            CHECK(nb.entry_ids.size() == cfg.window);
            CHECK(nb.entries.size() == cfg.window);
        }
        // Record entries are verbatim source lines.
        const std::string input = slurp(ws.file("log.csv"));
        for (const auto& line : rec.entries)
            CHECK(input.find(line + "\n") != std::string::npos);
    }

    // The timeseries file mirrors chunk.lof in window order.
    const auto rows = read_timeseries(ws.file("out") / "chunk_0_timeseries.csv");
    REQUIRE(rows.size() == windows);
    for (std::size_t i = 0; i < windows; ++i) {
        CHECK(rows[i].first == chunk.window_first_ids[i]);
        if (i) CHECK(rows[i].first > rows[i - 1].first);
    }

    // The JSON report round-trips.
    std::ifstream jin(ws.file("out") / "chunk_0_outliers.json");
    const auto back = report_from_json(jin);
    REQUIRE(back.size() == chunk.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].window_index == chunk.records[i].window_index);
        CHECK(back[i].entry_ids == chunk.records[i].entry_ids);
        CHECK(back[i].entries == chunk.records[i].entries);
        if (std::isinf(chunk.records[i].lof))
            CHECK(std::isinf(back[i].lof));
        else
            CHECK(back[i].lof == chunk.records[i].lof);
        REQUIRE(back[i].neighborhood.size() == chunk.records[i].neighborhood.size());
        for (std::size_t j = 0; j < back[i].neighborhood.size(); ++j) {
            CHECK(back[i].neighborhood[j].window_index ==
                  chunk.records[i].neighborhood[j].window_index);
            CHECK(back[i].neighborhood[j].distance ==
                  chunk.records[i].neighborhood[j].distance);
            CHECK(back[i].neighborhood[j].entries ==
                  chunk.records[i].neighborhood[j].entries);
        }
    }

    // The text report shows each outlier's lines verbatim.
    const std::string text = slurp(ws.file("out") / "chunk_0_outliers.txt");
    for (const auto& line : chunk.records[0].entries)
        CHECK(text.find(line) != std::string::npos);
}

TEST_CASE("run is byte-identical across thread counts") {
    Workspace ws("threads");
    materialize(ws, small_scenario());

    auto cfg1 = base_run(ws, "out1");
    cfg1.threads = 1;
    auto cfg4 = base_run(ws, "out4");
    cfg4.threads = 4;
    // Several chunks so the worker pool actually interleaves.
    cfg1.chunk_size = 60;
    cfg4.chunk_size = 60;

    const auto r1 = run(cfg1);
    const auto r4 = run(cfg4);
    CHECK(r1.exit_code == 0);
    CHECK(r4.exit_code == 0);
    REQUIRE(r1.chunks.size() == r4.chunks.size());
    REQUIRE(r1.chunks.size() >= 2);

    for (const auto& entry : fs::directory_iterator(ws.file("out1"))) {
        const auto name = entry.path().filename();
        CAPTURE(name.string());
        CHECK(slurp(entry.path()) == slurp(ws.file("out4") / name));
    }
}

TEST_CASE("chunks are processed independently") {
    Workspace ws("chunked");
    const auto [total, noise] = materialize(ws, small_scenario());
    auto cfg = base_run(ws, "out");
    cfg.chunk_size = 50;
    const auto report = run(cfg);
    CHECK(report.exit_code == 0);
    REQUIRE(report.chunks.size() == (total + 49) / 50);
    REQUIRE(report.chunks.size() >= 2);

    // Each chunk scores its own windows only; window counts are per chunk.
    for (const auto& chunk : report.chunks) {
        CHECK(!chunk.failed);
        if (chunk.skipped) continue;
        CHECK(chunk.lof.size() >= 1);
        CHECK(fs::exists(ws.file("out") /
                         ("chunk_" + std::to_string(chunk.chunk_index) + "_outliers.json")));
    }

    // First ids of consecutive chunks' windows do not interleave.
    for (std::size_t i = 1; i < report.chunks.size(); ++i) {
        if (report.chunks[i].skipped || report.chunks[i - 1].skipped) continue;
        CHECK(report.chunks[i].window_first_ids.front() >
              report.chunks[i - 1].window_first_ids.back());
    }
}

TEST_CASE("a chunk smaller than one window is skipped with a warning") {
    Workspace ws("skipped");
    // 12 entries, chunk size 10: second chunk has 2 < window entries.
    std::ostringstream log;
    for (int i = 0; i < 12; ++i) {
        LogEntry e;
        e.id = i + 1;
        e.timestamp = 1402012800 + 60 * i;
        e.command = "air";
        e.numeric_arg = 25.0 + 0.1 * (i % 3);
        log << serialize_entry(e) << "\n";
    }
    ws.write("log.csv", log.str());
    ws.write("classes.csv", "air,sensor_value\n");

    auto cfg = base_run(ws, "out");
    cfg.chunk_size = 10;
    cfg.window = 5;
    cfg.k = 2;
    const auto report = run(cfg);
    CHECK(report.exit_code == 0);
    REQUIRE(report.chunks.size() == 2);
    CHECK(!report.chunks[0].skipped);
    CHECK(report.chunks[1].skipped);
    CHECK(report.chunks[1].lof.empty());
    CHECK(!report.warnings.empty());

    // Skipped chunks still get header-only outputs.
    const auto rows = read_timeseries(ws.file("out") / "chunk_1_timeseries.csv");
    CHECK(rows.empty());
    std::ifstream jin(ws.file("out") / "chunk_1_outliers.json");
    CHECK(report_from_json(jin).empty());
}

TEST_CASE("a chunk that cannot support k windows fails but others proceed") {
    Workspace ws("failed");
    // First chunk has 40 entries -> 36 windows > k; second has 8 -> 4 <= k.
    std::ostringstream log;
    for (int i = 0; i < 48; ++i) {
        LogEntry e;
        e.id = i + 1;
        e.timestamp = 1402012800 + 60 * i;
        e.command = "air";
        e.numeric_arg = 25.0 + 0.1 * (i % 5);
        log << serialize_entry(e) << "\n";
    }
    ws.write("log.csv", log.str());
    ws.write("classes.csv", "air,sensor_value\n");

    auto cfg = base_run(ws, "out");
    cfg.chunk_size = 40;
    cfg.window = 5;
    cfg.k = 20;
    const auto report = run(cfg);
    CHECK(report.exit_code == 1);
    REQUIRE(report.chunks.size() == 2);
    CHECK(!report.chunks[0].failed);
    CHECK(report.chunks[0].lof.size() == 36);
    CHECK(report.chunks[1].failed);
    CHECK(!report.chunks[1].error.empty());
}

TEST_CASE("suppress_overlap keeps picked windows disjoint") {
    Workspace ws("suppress");
    materialize(ws, small_scenario());
    auto cfg = base_run(ws, "out");
    cfg.top_n = 6;
    cfg.suppress_overlap = true;
    const auto report = run(cfg);
    REQUIRE(report.chunks.size() == 1);
    const auto& recs = report.chunks[0].records;
    REQUIRE(recs.size() >= 2);
    for (std::size_t i = 0; i < recs.size(); ++i)
        for (std::size_t j = i + 1; j < recs.size(); ++j) {
            const auto a = recs[i].window_index;
            const auto b = recs[j].window_index;
            CHECK((a > b ? a - b : b - a) >= cfg.window);
        }
}

TEST_CASE("dump_vectors writes the normalized matrices") {
    Workspace ws("dump");
    materialize(ws, small_scenario());
    auto cfg = base_run(ws, "out");
    cfg.dump_vectors = true;
    const auto report = run(cfg);
    CHECK(report.exit_code == 0);
    CHECK(fs::exists(ws.file("out") / "chunk_0_entry_vectors.csv"));
    CHECK(fs::exists(ws.file("out") / "chunk_0_window_vectors.csv"));
}

TEST_CASE("run rejects unusable configuration up front") {
    Workspace ws("badcfg");
    materialize(ws, small_scenario());

    auto missing_input = base_run(ws, "out");
    missing_input.input_path = ws.file("nope.csv").string();
    CHECK_THROWS_AS(run(missing_input), ConfigError);

    auto missing_classes = base_run(ws, "out");
    missing_classes.classes_path = ws.file("nope.csv").string();
    CHECK_THROWS_AS(run(missing_classes), ConfigError);

    auto zero_window = base_run(ws, "out");
    zero_window.window = 0;
    CHECK_THROWS_AS(run(zero_window), ConfigError);

    auto zero_k = base_run(ws, "out");
    zero_k.k = 0;
    CHECK_THROWS_AS(run(zero_k), ConfigError);
}

TEST_CASE("emit helpers format scores exactly") {
    std::ostringstream out;
    const std::vector<std::uint64_t> ids = {5, 6, 7};
    const std::vector<double> lof = {1.0, 1.25, std::numeric_limits<double>::infinity()};
    emit_timeseries(ids, lof, out);
    CHECK(out.str() == "window_first_entry_id,lof\n5,1\n6,1.25\n7,inf\n");
}
