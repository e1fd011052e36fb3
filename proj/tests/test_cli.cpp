#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "evd/core.hpp"
#include "evd/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("evd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run_cli(const std::string& args, const fs::path& dir) {
    fs::path out = dir / "stdout.txt";
    fs::path err = dir / "stderr.txt";
    std::string cmd = std::string(EVD_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                      err.string();
    int status = std::system(cmd.c_str());
    CliRun result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

void write_example_corpus(const fs::path& p) {
    std::ofstream out(p);
    auto doc = [&](const char* id, int64_t ts, const char* author,
                   std::initializer_list<std::pair<const char*, const char*>> entities) {
        evd::Document d;
        d.id = id;
        d.ts_ms = ts;
        d.author_id = author;
        d.domain = "us";
        for (auto& [kind, text] : entities) {
            d.entities.push_back(evd::Entity{*evd::entity_kind_from_string(kind), text});
        }
        d.canonicalize_entities();
        out << evd::document_to_json(d) << "\n";
    };
    doc("t1", 1000, "u1", {{"named_entity", "iphone"}, {"hashtag", "#AppleEvent"}});
    doc("t2", 2000, "u2",
        {{"named_entity", "Tim Cook"}, {"named_entity", "iphone"}, {"hashtag", "#appleevent"}});
    doc("t3", 3000, "u3", {{"named_entity", "tim cook"}, {"named_entity", "iphone"}});
}

}  // namespace

TEST_CASE("help exits zero and documents subcommands") {
    TempDir dir;
    CliRun r = run_cli("--help", dir.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("replay") != std::string::npos);
    CHECK(r.out.find("gen-corpus") != std::string::npos);
}

TEST_CASE("unknown flags are rejected") {
    TempDir dir;
    CliRun r = run_cli("replay --input x --out y --frobnicate", dir.path);
    CHECK(r.exit_code != 0);
}

TEST_CASE("replay of an empty file succeeds with zero ticks") {
    TempDir dir;
    fs::path input = dir.path / "empty.jsonl";
    std::ofstream(input).close();
    fs::path out = dir.path / "snapshots.jsonl";
    CliRun r = run_cli("replay --input " + input.string() + " --out " + out.string(), dir.path);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("ticks=0") != std::string::npos);
    CHECK(slurp(out).empty());
}

TEST_CASE("replay of a missing file fails with a message") {
    TempDir dir;
    CliRun r = run_cli("replay --input " + (dir.path / "nope.jsonl").string() + " --out " +
                           (dir.path / "o.jsonl").string(),
                       dir.path);
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("replay of the example corpus emits the triangle cluster") {
    TempDir dir;
    fs::path input = dir.path / "docs.jsonl";
    write_example_corpus(input);
    fs::path out = dir.path / "snapshots.jsonl";
    CliRun r = run_cli("replay --input " + input.string() + " --out " + out.string() +
                           " -S 0.1 -R 1",
                       dir.path);
    CHECK(r.exit_code == 0);
    std::string snapshot = slurp(out);
    CHECK(snapshot.find("\"tick\":0") != std::string::npos);
    CHECK(snapshot.find("iphone") != std::string::npos);
    CHECK(snapshot.find("#appleevent") != std::string::npos);
    CHECK(snapshot.find("tim cook") != std::string::npos);

    // malformed lines are counted, not fatal
    std::ofstream(input, std::ios::app) << "{broken\n";
    CliRun r2 = run_cli("replay --input " + input.string() + " --out " + out.string(), dir.path);
    CHECK(r2.exit_code == 0);
    CHECK(r2.err.find("parse_errors=1") != std::string::npos);
}

TEST_CASE("config file values apply and explicit flags win") {
    TempDir dir;
    fs::path input = dir.path / "docs.jsonl";
    write_example_corpus(input);
    fs::path config = dir.path / "engine.cfg";
    std::ofstream(config) << "min_similarity=0.95\nwindow=10\n";

    fs::path out1 = dir.path / "a.jsonl";
    CliRun strict = run_cli("replay --input " + input.string() + " --out " + out1.string() +
                                " --config " + config.string(),
                            dir.path);
    CHECK(strict.exit_code == 0);
    CHECK(slurp(out1).find("iphone") == std::string::npos);  // S=0.95 cuts everything

    fs::path out2 = dir.path / "b.jsonl";
    CliRun relaxed = run_cli("replay --input " + input.string() + " --out " + out2.string() +
                                 " --config " + config.string() + " -S 0.1",
                             dir.path);
    CHECK(relaxed.exit_code == 0);
    CHECK(slurp(out2).find("iphone") != std::string::npos);  // flag overrides file

    std::ofstream(config) << "mystery=1\n";
    CliRun bad = run_cli("replay --input " + input.string() + " --out " + out2.string() +
                             " --config " + config.string(),
                         dir.path);
    CHECK(bad.exit_code != 0);
    CHECK(bad.err.find("mystery") != std::string::npos);
}

TEST_CASE("gen-corpus is deterministic per seed") {
    TempDir dir;
    auto gen = [&](const std::string& name, int seed) {
        fs::path docs = dir.path / (name + ".jsonl");
        fs::path gt = dir.path / (name + ".csv");
        CliRun r = run_cli("gen-corpus --preset tiered --minutes 2 --seed " +
                               std::to_string(seed) + " --out " + docs.string() +
                               " --ground-truth " + gt.string(),
                           dir.path);
        REQUIRE(r.exit_code == 0);
        return slurp(docs) + "|" + slurp(gt);
    };
    std::string a = gen("a", 7);
    std::string b = gen("b", 7);
    std::string c = gen("c", 8);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("replay twice produces identical bytes") {
    TempDir dir;
    fs::path docs = dir.path / "docs.jsonl";
    fs::path gt = dir.path / "gt.csv";
    REQUIRE(run_cli("gen-corpus --preset tiered --minutes 3 --seed 5 --out " + docs.string() +
                        " --ground-truth " + gt.string(),
                    dir.path)
                .exit_code == 0);
    fs::path out1 = dir.path / "r1.jsonl", out2 = dir.path / "r2.jsonl";
    REQUIRE(run_cli("replay --input " + docs.string() + " --out " + out1.string() + " --seed 11",
                    dir.path)
                .exit_code == 0);
    REQUIRE(run_cli("replay --input " + docs.string() + " --out " + out2.string() + " --seed 11",
                    dir.path)
                .exit_code == 0);
    std::string b1 = slurp(out1);
    CHECK_FALSE(b1.empty());
    CHECK(b1 == slurp(out2));
}

TEST_CASE("evaluate emits one metric row and rejects bad schemas") {
    TempDir dir;
    fs::path snapshots = dir.path / "snap.jsonl";
    std::ofstream(snapshots)
        << R"({"tick":0,"dropped":0,"clusters":[{"chain_id":"c1","score":4.0,"entities":[)"
        << R"({"kind":"named_entity","text":"a","freq":2},)"
        << R"({"kind":"named_entity","text":"b","freq":2},)"
        << R"({"kind":"named_entity","text":"x","freq":1}]}]})"
        << "\n";
    fs::path gt = dir.path / "gt.csv";
    std::ofstream(gt) << "entity_kind,entity_text,event_id,title,relevant\n"
                         "named_entity,a,1,ev,Y\nnamed_entity,b,1,ev,Y\nnamed_entity,x,1,ev,N\n";

    CliRun r = run_cli("evaluate --snapshots " + snapshots.string() + " --ground-truth " +
                           gt.string(),
                       dir.path);
    CHECK(r.exit_code == 0);
    // all-in-one cluster: consolidation 1, discrimination 0
    CHECK(r.out.find("NA,NA,NA,1,1,0,0") != std::string::npos);

    std::ofstream(gt) << "wrong,header\n";
    CliRun bad = run_cli("evaluate --snapshots " + snapshots.string() + " --ground-truth " +
                             gt.string(),
                         dir.path);
    CHECK(bad.exit_code != 0);
    CHECK(bad.err.find("line 1") != std::string::npos);
}

TEST_CASE("export-chains filters by range and pattern") {
    TempDir dir;
    fs::path docs = dir.path / "docs.jsonl";
    write_example_corpus(docs);
    fs::path snapshots = dir.path / "snap.jsonl";
    REQUIRE(run_cli("replay --input " + docs.string() + " --out " + snapshots.string(), dir.path)
                .exit_code == 0);

    CliRun all = run_cli("export-chains --snapshots " + snapshots.string(), dir.path);
    CHECK(all.exit_code == 0);
    CHECK(all.out.find("tick,chain_id,size,agg_freq,entities") == 0);
    CHECK(all.out.find("#appleevent|iphone|tim cook") != std::string::npos);

    CliRun none = run_cli("export-chains --snapshots " + snapshots.string() + " --match 'zzz*'",
                          dir.path);
    CHECK(none.exit_code == 0);
    CHECK(none.out.find("#appleevent") == std::string::npos);
}

TEST_CASE("sweep produces a row per grid point") {
    TempDir dir;
    fs::path docs = dir.path / "docs.jsonl";
    fs::path gt = dir.path / "gt.csv";
    REQUIRE(run_cli("gen-corpus --preset uniform --events 2 --minutes 2 --noise-docs 5 --seed 3"
                    " --out " +
                        docs.string() + " --ground-truth " + gt.string(),
                    dir.path)
                .exit_code == 0);
    CliRun r = run_cli("sweep --input " + docs.string() + " --ground-truth " + gt.string() +
                           " --s-grid 0,0.2 --r-grid 1 --backends louvain,cc --jobs 2",
                       dir.path);
    CHECK(r.exit_code == 0);
    // header plus 2 x 1 x 2 rows
    int lines = 0;
    for (char c : r.out) lines += c == '\n';
    CHECK(lines == 5);
    CHECK(r.out.find("0.2,1,connected_components") != std::string::npos);
}

TEST_CASE("run mode drains stdin-style input on a compressed clock") {
    TempDir dir;
    fs::path docs = dir.path / "docs.jsonl";
    {
        std::ofstream out(docs);
        for (int minute = 0; minute < 3; ++minute) {
            for (int i = 0; i < 4; ++i) {
                evd::Document d;
                d.id = "d" + std::to_string(minute * 10 + i);
                d.ts_ms = minute * 100 + i * 20;  // minute-ms 100
                d.author_id = "u" + std::to_string(minute * 10 + i);
                d.domain = "us";
                d.entities = {evd::Entity{evd::EntityKind::named_entity, "alpha"},
                              evd::Entity{evd::EntityKind::named_entity, "beta"}};
                out << evd::document_to_json(d) << "\n";
            }
        }
    }
    fs::path out = dir.path / "snapshots.jsonl";
    CliRun r = run_cli("run --input " + docs.string() + " --out " + out.string() +
                           " --minute-ms 100 --workers 2",
                       dir.path);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("processed=12") != std::string::npos);
    std::string bytes = slurp(out);
    CHECK(bytes.find("\"tick\":0") != std::string::npos);
    CHECK(bytes.find("\"tick\":2") != std::string::npos);
}
