// Command-line entry point: replay, run, evaluate, sweep, export-chains,
// gen-corpus over the event-detection engine.

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "evd/corpus_gen.hpp"
#include "evd/engine.hpp"
#include "evd/evaluation.hpp"
#include "evd/io.hpp"

namespace {

struct EngineFlags {
    std::string config_path;
    evd::EngineConfig config;
    std::string backend = "louvain";
    uint64_t seed = 42;

    CLI::Option* similarity = nullptr;
    CLI::Option* resolution = nullptr;
    CLI::Option* window = nullptr;
    CLI::Option* link_threshold = nullptr;
    CLI::Option* short_window = nullptr;
    CLI::Option* long_window = nullptr;
    CLI::Option* top_k = nullptr;
    CLI::Option* queue_limit = nullptr;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key=value config file");
    flags.similarity =
        cmd->add_option("-S,--similarity", flags.config.min_similarity,
                        "minimum similarity threshold S");
    flags.resolution =
        cmd->add_option("-R,--resolution", flags.config.resolution, "Louvain resolution R");
    flags.window = cmd->add_option("-W,--window", flags.config.window,
                                   "co-occurrence window, minutes");
    flags.link_threshold = cmd->add_option("--link-threshold", flags.config.link_threshold,
                                           "cluster link threshold");
    flags.short_window =
        cmd->add_option("--short-window", flags.config.short_window, "trend short window, minutes");
    flags.long_window =
        cmd->add_option("--long-window", flags.config.long_window, "trend long window, minutes");
    flags.top_k = cmd->add_option("--top-k", flags.config.trends_top_k,
                                  "trending entities kept per domain");
    flags.queue_limit = cmd->add_option("--queue-limit", flags.config.shed_queue_limit,
                                        "ingest queue capacity");
    cmd->add_option("--backend", flags.backend, "clustering backend: louvain|cc");
    cmd->add_option("--seed", flags.seed, "seed for all randomness");
}

// Config file first, explicit flags override.
evd::EngineConfig resolve_config(const EngineFlags& flags) {
    evd::EngineConfig config;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw std::runtime_error("cannot open config: " + flags.config_path);
        auto entries = evd::parse_key_values(in);
        if (auto problem = evd::apply_config_entries(config, entries)) {
            throw std::runtime_error(flags.config_path + ": " + *problem);
        }
    }
    if (flags.similarity->count()) config.min_similarity = flags.config.min_similarity;
    if (flags.resolution->count()) config.resolution = flags.config.resolution;
    if (flags.window->count()) config.window = flags.config.window;
    if (flags.link_threshold->count()) config.link_threshold = flags.config.link_threshold;
    if (flags.short_window->count()) config.short_window = flags.config.short_window;
    if (flags.long_window->count()) config.long_window = flags.config.long_window;
    if (flags.top_k->count()) config.trends_top_k = flags.config.trends_top_k;
    if (flags.queue_limit->count()) config.shed_queue_limit = flags.config.shed_queue_limit;
    if (auto problem = config.validate()) throw std::runtime_error("config: " + *problem);
    return config;
}

evd::EngineOptions resolve_options(const EngineFlags& flags) {
    evd::EngineOptions options;
    auto backend = evd::backend_from_string(flags.backend);
    if (!backend) throw std::runtime_error("unknown backend: " + flags.backend);
    options.backend = *backend;
    options.seed = flags.seed;
    return options;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw std::runtime_error("empty grid: " + csv);
    return grid;
}

void print_summary(const evd::ReplayStats& stats, const evd::Engine& engine) {
    const evd::StageTimings& t = engine.timings();
    auto ms = [](int64_t ns) { return static_cast<double>(ns) / 1e6; };
    std::cerr << "documents=" << stats.documents << " parse_errors=" << stats.parse_errors
              << " filtered=" << stats.filtered << " ticks=" << stats.ticks
              << " clusters=" << stats.clusters << " chains=" << stats.chains
              << " shed=" << stats.shed << " throttled=" << engine.throttled() << "\n";
    std::cerr << "timings_ms parse=" << ms(stats.parse_ns) << " pipeline=" << ms(stats.pipeline_ns)
              << " evict=" << ms(t.evict_ns) << " trend=" << ms(t.trend_ns)
              << " graph=" << ms(t.graph_ns) << " cluster=" << ms(t.cluster_ns)
              << " link=" << ms(t.link_ns) << " persist=" << ms(t.persist_ns) << "\n";
}

int cmd_replay(const EngineFlags& flags, const std::string& input_path,
               const std::string& out_path) {
    std::ifstream in(input_path);
    if (!in) {
        std::cerr << "error: cannot open input: " << input_path << "\n";
        return 1;
    }
    evd::Engine engine(resolve_config(flags), resolve_options(flags));
    evd::JsonlFileSink sink(out_path);
    engine.attach_sink(&sink);
    evd::ReplayStats stats = evd::replay(in, engine);
    print_summary(stats, engine);
    return 0;
}

int cmd_run(const EngineFlags& flags, const std::string& input_path, const std::string& out_path,
            unsigned workers, int64_t minute_ms) {
    evd::EngineOptions options = resolve_options(flags);
    options.millis_per_tick = minute_ms;
    evd::Engine engine(resolve_config(flags), options);
    evd::JsonlFileSink sink(out_path);
    engine.attach_sink(&sink);

    std::istream* in = &std::cin;
    std::ifstream file;
    if (!input_path.empty() && input_path != "-") {
        file.open(input_path);
        if (!file) {
            std::cerr << "error: cannot open input: " << input_path << "\n";
            return 1;
        }
        in = &file;
    }

    std::atomic<bool> done{false};
    std::atomic<uint64_t> parse_errors{0};
    // Stream clock: the highest minute with a later document already seen is
    // complete and safe to tick.
    std::atomic<int64_t> min_tick{INT64_MAX};
    std::atomic<int64_t> max_tick{INT64_MIN};

    std::vector<std::thread> pool;
    for (unsigned i = 0; i < std::max(1u, workers); ++i) {
        pool.emplace_back([&]() {
            while (true) {
                if (engine.drain(256) == 0) {
                    if (done.load()) break;
                    std::this_thread::sleep_for(std::chrono::milliseconds(1));
                }
            }
        });
    }

    std::atomic<int64_t> ticked_through{INT64_MIN};
    std::thread ticker([&]() {
        int64_t last = INT64_MIN;
        while (!done.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min<int64_t>(minute_ms, 20)));
            int64_t lo = min_tick.load();
            int64_t hi = max_tick.load();
            if (lo == INT64_MAX) continue;
            if (last == INT64_MIN) last = lo - 1;
            while (last < hi - 1) {
                engine.tick(++last);
                ticked_through.store(last);
            }
        }
    });

    std::string line;
    while (std::getline(*in, line)) {
        if (line.empty()) continue;
        auto doc = evd::parse_document_line(line);
        if (!doc) {
            parse_errors.fetch_add(1);
            continue;
        }
        int64_t t = evd::tick_of(doc->ts_ms, minute_ms);
        int64_t lo = min_tick.load();
        while (t < lo && !min_tick.compare_exchange_weak(lo, t)) {
        }
        int64_t hi = max_tick.load();
        while (t > hi && !max_tick.compare_exchange_weak(hi, t)) {
        }
        engine.submit(std::move(*doc));
    }

    done.store(true);
    for (auto& t : pool) t.join();
    ticker.join();
    // close out the final minutes
    engine.drain(SIZE_MAX);
    if (min_tick.load() != INT64_MAX) {
        int64_t last = ticked_through.load();
        if (last == INT64_MIN) last = min_tick.load() - 1;
        for (int64_t t = last + 1; t <= max_tick.load(); ++t) engine.tick(t);
    }
    engine.stop();
    std::cerr << "processed=" << engine.processed() << " shed=" << engine.shed_total()
              << " parse_errors=" << parse_errors.load() << " ticks=" << engine.timings().ticks
              << "\n";
    return 0;
}

int cmd_evaluate(const std::string& snapshots_path, const std::string& gt_path,
                 const std::string& out_path) {
    std::ifstream snap_in(snapshots_path);
    if (!snap_in) {
        std::cerr << "error: cannot open snapshots: " << snapshots_path << "\n";
        return 1;
    }
    std::ifstream gt_in(gt_path);
    if (!gt_in) {
        std::cerr << "error: cannot open ground truth: " << gt_path << "\n";
        return 1;
    }
    auto snapshots = evd::load_snapshots(snap_in);
    auto gt = evd::load_ground_truth_csv(gt_in);
    evd::MetricReport report = evd::evaluate_run(snapshots, gt);
    std::string csv = evd::metric_reports_to_csv({report});
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        out << csv;
    }
    return 0;
}

int cmd_sweep(const EngineFlags& flags, const std::string& input_path, const std::string& gt_path,
              const std::string& s_grid, const std::string& r_grid, const std::string& backends,
              unsigned jobs, const std::string& out_path) {
    std::ifstream in(input_path);
    if (!in) {
        std::cerr << "error: cannot open input: " << input_path << "\n";
        return 1;
    }
    std::ifstream gt_in(gt_path);
    if (!gt_in) {
        std::cerr << "error: cannot open ground truth: " << gt_path << "\n";
        return 1;
    }
    auto gt = evd::load_ground_truth_csv(gt_in);

    std::vector<evd::Document> documents;
    std::string line;
    uint64_t parse_errors = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto doc = evd::parse_document_line(line);
        if (doc) documents.push_back(std::move(*doc));
        else ++parse_errors;
    }

    evd::SweepSpec spec;
    spec.base = resolve_config(flags);
    spec.seed = flags.seed;
    spec.jobs = jobs;
    spec.similarity_grid = parse_grid(s_grid);
    spec.resolution_grid = parse_grid(r_grid);
    std::stringstream ss(backends);
    std::string name;
    while (std::getline(ss, name, ',')) {
        auto b = evd::backend_from_string(name);
        if (!b) {
            std::cerr << "error: unknown backend: " << name << "\n";
            return 1;
        }
        spec.backends.push_back(*b);
    }

    auto reports = evd::sweep(documents, gt, spec);
    std::string csv = evd::metric_reports_to_csv(reports);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        out << csv;
    }
    if (parse_errors) std::cerr << "parse_errors=" << parse_errors << "\n";
    return 0;
}

int cmd_export_chains(const std::string& snapshots_path, const std::string& out_path, int64_t from,
                      int64_t to, const std::string& match) {
    std::ifstream in(snapshots_path);
    if (!in) {
        std::cerr << "error: cannot open snapshots: " << snapshots_path << "\n";
        return 1;
    }
    auto snapshots = evd::load_snapshots(in);
    auto rows = evd::export_chains(snapshots, from, to, match);
    std::string csv = evd::chain_rows_to_csv(rows);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        out << csv;
    }
    return 0;
}

int cmd_gen_corpus(const std::string& scenario_path,
                   const std::map<std::string, std::string>& overrides, uint64_t seed,
                   const std::string& docs_path, const std::string& gt_path) {
    std::map<std::string, std::string> entries;
    if (!scenario_path.empty()) {
        std::ifstream in(scenario_path);
        if (!in) {
            std::cerr << "error: cannot open scenario: " << scenario_path << "\n";
            return 1;
        }
        entries = evd::parse_key_values(in);
    }
    for (const auto& [k, v] : overrides) entries[k] = v;

    evd::Scenario scenario = evd::scenario_from_entries(entries);
    std::ofstream docs_out(docs_path);
    if (!docs_out) {
        std::cerr << "error: cannot open output: " << docs_path << "\n";
        return 1;
    }
    uint64_t count = 0;
    evd::generate_corpus(scenario, seed, [&](evd::Document&& doc) {
        docs_out << evd::document_to_json(doc) << "\n";
        ++count;
    });
    std::ofstream gt_out(gt_path);
    if (!gt_out) {
        std::cerr << "error: cannot open output: " << gt_path << "\n";
        return 1;
    }
    gt_out << evd::ground_truth_to_csv(evd::ground_truth_for(scenario));
    std::cerr << "documents=" << count
              << " events=" << scenario.events.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming event detection: trending-entity clusters linked over time"};
    app.require_subcommand(1);

    // replay
    auto* replay_cmd = app.add_subcommand("replay", "deterministic virtual-clock replay of a "
                                                    "JSONL document file");
    EngineFlags replay_flags;
    std::string replay_input, replay_out;
    replay_cmd->add_option("--input", replay_input, "JSONL documents")->required();
    replay_cmd->add_option("--out", replay_out, "snapshot JSONL output")->required();
    add_engine_flags(replay_cmd, replay_flags);

    // run
    auto* run_cmd = app.add_subcommand("run", "wall-clock mode reading documents from stdin");
    EngineFlags run_flags;
    std::string run_input = "-", run_out;
    unsigned run_workers = 1;
    int64_t run_minute_ms = 60000;
    run_cmd->add_option("--input", run_input, "JSONL documents ('-' for stdin)");
    run_cmd->add_option("--out", run_out, "snapshot JSONL output")->required();
    run_cmd->add_option("--workers", run_workers, "ingestion worker threads");
    run_cmd->add_option("--minute-ms", run_minute_ms, "minute length in wall milliseconds")
        ->check(CLI::PositiveNumber);
    add_engine_flags(run_cmd, run_flags);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "metrics for a snapshot file against ground "
                                                    "truth");
    std::string eval_snapshots, eval_gt, eval_out;
    eval_cmd->add_option("--snapshots", eval_snapshots, "snapshot JSONL")->required();
    eval_cmd->add_option("--ground-truth", eval_gt, "ground truth CSV")->required();
    eval_cmd->add_option("--out", eval_out, "metric CSV output ('-' for stdout)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "one engine run per (S,R,backend) grid point");
    EngineFlags sweep_flags;
    std::string sweep_input, sweep_gt, sweep_s = "0,0.1,0.2,0.3,0.4", sweep_r = "1";
    std::string sweep_backends = "louvain,connected_components", sweep_out;
    unsigned sweep_jobs = 1;
    sweep_cmd->add_option("--input", sweep_input, "JSONL documents")->required();
    sweep_cmd->add_option("--ground-truth", sweep_gt, "ground truth CSV")->required();
    sweep_cmd->add_option("--s-grid", sweep_s, "comma-separated S values");
    sweep_cmd->add_option("--r-grid", sweep_r, "comma-separated R values");
    sweep_cmd->add_option("--backends", sweep_backends, "comma-separated backends");
    sweep_cmd->add_option("--jobs", sweep_jobs, "parallel runs");
    sweep_cmd->add_option("--out", sweep_out, "metric CSV output ('-' for stdout)");
    add_engine_flags(sweep_cmd, sweep_flags);

    // export-chains
    auto* export_cmd = app.add_subcommand("export-chains", "per-(tick, chain) CSV from a snapshot "
                                                           "file");
    std::string export_snapshots, export_out, export_match;
    int64_t export_from = 0, export_to = INT64_MAX;
    export_cmd->add_option("--snapshots", export_snapshots, "snapshot JSONL")->required();
    export_cmd->add_option("--out", export_out, "CSV output ('-' for stdout)");
    export_cmd->add_option("--from", export_from, "first tick");
    export_cmd->add_option("--to", export_to, "last tick");
    export_cmd->add_option("--match", export_match, "glob over entity text, e.g. '*golden*'");

    // gen-corpus
    auto* gen_cmd = app.add_subcommand("gen-corpus", "synthetic corpus plus ground truth");
    std::string gen_scenario, gen_docs, gen_gt, gen_preset;
    std::string gen_minutes, gen_events, gen_docs_target, gen_noise_docs, gen_noise_entities;
    uint64_t gen_seed = 42;
    gen_cmd->add_option("--scenario", gen_scenario, "scenario key=value file");
    gen_cmd->add_option("--preset", gen_preset, "tiered|uniform|load");
    gen_cmd->add_option("--minutes", gen_minutes, "corpus length in minutes");
    gen_cmd->add_option("--events", gen_events, "event count (uniform preset)");
    gen_cmd->add_option("--docs-target", gen_docs_target, "approximate documents (load preset)");
    gen_cmd->add_option("--noise-docs", gen_noise_docs, "noise documents per minute");
    gen_cmd->add_option("--noise-entities", gen_noise_entities, "noise entity pool size");
    gen_cmd->add_option("--seed", gen_seed, "generator seed");
    gen_cmd->add_option("--out", gen_docs, "JSONL document output")->required();
    gen_cmd->add_option("--ground-truth", gen_gt, "ground truth CSV output")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay_cmd->parsed()) return cmd_replay(replay_flags, replay_input, replay_out);
        if (run_cmd->parsed()) {
            return cmd_run(run_flags, run_input, run_out, run_workers, run_minute_ms);
        }
        if (eval_cmd->parsed()) return cmd_evaluate(eval_snapshots, eval_gt, eval_out);
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_flags, sweep_input, sweep_gt, sweep_s, sweep_r, sweep_backends,
                             sweep_jobs, sweep_out);
        }
        if (export_cmd->parsed()) {
            return cmd_export_chains(export_snapshots, export_out, export_from, export_to,
                                     export_match);
        }
        if (gen_cmd->parsed()) {
            std::map<std::string, std::string> overrides;
            if (!gen_preset.empty()) overrides["preset"] = gen_preset;
            if (!gen_minutes.empty()) overrides["minutes"] = gen_minutes;
            if (!gen_events.empty()) overrides["events"] = gen_events;
            if (!gen_docs_target.empty()) overrides["docs_target"] = gen_docs_target;
            if (!gen_noise_docs.empty()) overrides["noise_docs_per_minute"] = gen_noise_docs;
            if (!gen_noise_entities.empty()) overrides["noise_entities"] = gen_noise_entities;
            return cmd_gen_corpus(gen_scenario, overrides, gen_seed, gen_docs, gen_gt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
