#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "lofscan/lof.hpp"
#include "lofscan/pipeline.hpp"
#include "lofscan/synthgen.hpp"

namespace {

int cmd_run(const lofscan::PipelineConfig& cfg) {
    const lofscan::RunReport report = lofscan::run(cfg);
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::size_t processed = 0, skipped = 0;
    for (const auto& chunk : report.chunks) {
        if (chunk.failed)
            std::cerr << "chunk " << chunk.chunk_index << " failed: " << chunk.error << '\n';
        else if (chunk.skipped)
            ++skipped;
        else
            ++processed;
    }
    std::cout << report.chunks.size() << " chunk(s): " << processed << " scored, " << skipped
              << " skipped, "
              << report.chunks.size() - processed - skipped << " failed; reports in "
              << cfg.out_dir << '\n';
    return report.exit_code;
}

int cmd_synth(const std::string& scenario_path, std::optional<std::uint64_t> seed,
              const std::string& out_path, const std::string& truth_path,
              const std::string& classes_path, bool check) {
    std::ifstream in(scenario_path);
    if (!in) throw lofscan::ConfigError("cannot open scenario '" + scenario_path + "'");
    lofscan::synth::ScenarioConfig cfg = lofscan::synth::load_scenario(in);
    if (seed) cfg.seed = *seed;

    const lofscan::synth::GeneratedLog log = lofscan::synth::generate(cfg);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw lofscan::ConfigError("cannot write log '" + out_path + "'");
    lofscan::serialize_entries(log.entries, out);

    std::ofstream truth(truth_path, std::ios::binary);
    if (!truth) throw lofscan::ConfigError("cannot write truth '" + truth_path + "'");
    truth << lofscan::synth::truth_to_json(log.truth);

    if (!classes_path.empty()) {
        std::ofstream classes(classes_path, std::ios::binary);
        if (!classes) throw lofscan::ConfigError("cannot write classes '" + classes_path + "'");
        classes << lofscan::synth::class_map_csv(cfg);
    }

    std::cout << log.entries.size() << " entries, " << log.truth.size()
              << " ground-truth range(s) -> " << out_path << '\n';

    if (check) {
        const auto res = lofscan::synth::validate(log.entries, log.truth, cfg);
        for (const std::string& d : res.diagnostics) std::cerr << "validate: " << d << '\n';
        std::cout << "validate: " << (res.ok ? "ok" : "MISMATCH") << " ("
                  << res.violations.size() << " violation(s) found)\n";
        if (!res.ok) return 1;
    }
    return 0;
}

int cmd_bench(std::size_t n, std::size_t d, std::size_t k, std::size_t threads,
              std::uint64_t seed) {
    std::mt19937_64 g(seed);
    lofscan::PointSet pts;
    pts.n = n;
    pts.d = d;
    pts.values.resize(n * d);
    for (double& v : pts.values) v = std::ldexp(double(g() >> 11), -53);

    const auto t0 = std::chrono::steady_clock::now();
    const lofscan::LofScores scores = lofscan::lof_scores(pts, k, threads);
    const auto t1 = std::chrono::steady_clock::now();

    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    const double evals = double(n) * double(n - 1);
    double max_lof = 0;
    for (double s : scores.lof) max_lof = std::max(max_lof, s);
    std::cout << "n=" << n << " d=" << d << " k=" << k << " threads=" << threads << '\n'
              << "time: " << seconds << " s\n"
              << "distance evaluations: " << evals << " (" << evals / seconds << "/s)\n"
              << "max lof: " << max_lof << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Window-level outlier scoring for operation logs"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Score a log and report outlier windows");
    lofscan::PipelineConfig cfg;
    std::vector<std::string> exclude_classes{"other"};
    run->add_option("--input", cfg.input_path, "Log CSV (id,timestamp,command,number,string)")
        ->required();
    run->add_option("--classes", cfg.classes_path, "Command classification CSV")->required();
    run->add_option("--out", cfg.out_dir, "Output directory for per-chunk reports")->required();
    run->add_option("--chunk-size", cfg.chunk_size, "Entries per chunk")
        ->capture_default_str();
    run->add_option("--window", cfg.window, "Entries per window")->capture_default_str();
    run->add_option("--k", cfg.k, "Neighborhood size")->capture_default_str();
    run->add_option("--top", cfg.top_n, "Outlier records per chunk")->capture_default_str();
    run->add_option("--exclude-class", exclude_classes,
                    "Command class to drop (actuator_drive, sensor_value, network_status, other)")
        ->capture_default_str();
    run->add_option("--exclude-pattern", cfg.filter.excluded_command_patterns,
                    "Glob of command names to drop (repeatable)");
    run->add_flag("--suppress-overlap", cfg.suppress_overlap,
                  "Skip top windows overlapping an already selected one");
    run->add_flag("--dump-vectors", cfg.dump_vectors,
                  "Also write normalized entry/window vectors per chunk");
    run->add_flag("--lenient", cfg.lenient_parse, "Skip malformed rows instead of failing");
    run->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic log with labeled faults");
    std::string scenario_path, log_path, truth_path, classes_out;
    std::optional<std::uint64_t> seed;
    bool check = false;
    synth->add_option("--scenario", scenario_path, "Scenario TOML")->required();
    synth->add_option("--seed", seed, "Override the scenario's seed");
    synth->add_option("--out", log_path, "Log CSV to write")->required();
    synth->add_option("--truth", truth_path, "Ground-truth JSON to write")->required();
    synth->add_option("--classes-out", classes_out, "Also write the matching classes CSV");
    synth->add_flag("--check", check, "Replay the output through the validator");

    // bench
    auto* bench = app.add_subcommand("bench", "Measure scoring throughput on random points");
    std::size_t bn = 2000, bd = 512, bk = 20, bthreads = 1;
    std::uint64_t bseed = 1;
    bench->add_option("--n", bn, "Points")->capture_default_str();
    bench->add_option("--d", bd, "Dimension")->capture_default_str();
    bench->add_option("--k", bk, "Neighborhood size")->capture_default_str();
    bench->add_option("--threads", bthreads, "Threads")->capture_default_str();
    bench->add_option("--seed", bseed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 2;
    }

    try {
        if (run->parsed()) {
            cfg.filter.excluded_classes.clear();
            for (const std::string& name : exclude_classes) {
                auto cls = lofscan::command_class_from_string(name);
                if (!cls) throw lofscan::ConfigError("unknown command class '" + name + "'");
                cfg.filter.excluded_classes.insert(*cls);
            }
            return cmd_run(cfg);
        }
        if (synth->parsed())
            return cmd_synth(scenario_path, seed, log_path, truth_path, classes_out, check);
        if (bench->parsed()) return cmd_bench(bn, bd, bk, bthreads, bseed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
