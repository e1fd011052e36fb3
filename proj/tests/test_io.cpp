#include "doctest.h"

#include <sstream>

#include "evd/io.hpp"

using namespace evd;

TEST_CASE("document line parses with normalization and dedup") {
    std::string line = R"({"id":"t1","ts_ms":120000,"author":"u1","domain":"us",)"
                       R"("entities":[{"kind":"hashtag","text":"#AppleEvent"},)"
                       R"({"kind":"named_entity","text":" Tim Cook "},)"
                       R"({"kind":"hashtag","text":"#appleevent"}]})";
    auto doc = parse_document_line(line);
    REQUIRE(doc.has_value());
    CHECK(doc->id == "t1");
    CHECK(doc->ts_ms == 120000);
    CHECK(doc->author_id == "u1");
    CHECK(doc->domain == "us");
    REQUIRE(doc->entities.size() == 2);
    CHECK(doc->entities[0].text == "#appleevent");
    CHECK(doc->entities[1].text == "tim cook");
}

TEST_CASE("document parse failures carry a reason") {
    std::string error;
    CHECK_FALSE(parse_document_line("not json", &error).has_value());
    CHECK(error == "invalid JSON");

    CHECK_FALSE(parse_document_line(R"({"id":"x"})", &error).has_value());
    CHECK_FALSE(error.empty());

    CHECK_FALSE(parse_document_line(
                    R"({"id":"x","ts_ms":1,"author":"a","domain":"d",)"
                    R"("entities":[{"kind":"emoji","text":"hi"}]})",
                    &error)
                    .has_value());
    CHECK(error == "unknown entity kind");

    CHECK_FALSE(parse_document_line(
                    R"({"id":"x","ts_ms":1,"author":"a","domain":"d",)"
                    R"("entities":[{"kind":"hashtag","text":"  "}]})",
                    &error)
                    .has_value());
    CHECK(error == "entity text empty after normalization");

    CHECK_FALSE(parse_document_line(
                    R"({"id":"x","ts_ms":-5,"author":"a","domain":"d","entities":[]})", &error)
                    .has_value());
    CHECK(error == "negative ts_ms");
}

TEST_CASE("document json round-trips") {
    Document doc;
    doc.id = "d9";
    doc.ts_ms = 654321;
    doc.author_id = "author";
    doc.domain = "uk";
    doc.entities = {Entity{EntityKind::hashtag, "#a"}, Entity{EntityKind::custom, "kg:42"}};
    auto parsed = parse_document_line(document_to_json(doc));
    REQUIRE(parsed.has_value());
    CHECK(parsed->id == doc.id);
    CHECK(parsed->ts_ms == doc.ts_ms);
    CHECK(parsed->entities == doc.entities);
}

TEST_CASE("snapshot json round-trips and keeps rank order") {
    ClusterSnapshot snapshot;
    snapshot.tick = 77;
    snapshot.dropped_documents = 3;
    auto c1 = Cluster::make({Entity{EntityKind::hashtag, "#a"}, Entity{EntityKind::hashtag, "#b"}},
                            {5, 6}, "c00000002");
    auto c2 = Cluster::make(
        {Entity{EntityKind::named_entity, "x"}, Entity{EntityKind::named_entity, "y"}}, {1, 2},
        "c00000001");
    snapshot.clusters = {*c1, *c2};

    std::string line = snapshot_to_json(snapshot);
    auto parsed = parse_snapshot_line(line);
    REQUIRE(parsed.has_value());
    CHECK(parsed->tick == 77);
    CHECK(parsed->dropped_documents == 3);
    REQUIRE(parsed->clusters.size() == 2);
    CHECK(parsed->clusters[0].id == "c00000002");
    CHECK(parsed->clusters[0].entities.size() == 2);
    CHECK(parsed->clusters[0].freqs == std::vector<uint64_t>{5, 6});
    CHECK(parsed->clusters[1].id == "c00000001");
}

TEST_CASE("snapshot parser accepts singleton clusters from hand-built files") {
    std::string line = R"({"tick":0,"dropped":0,"clusters":[{"chain_id":"c1","score":1.0,)"
                       R"("entities":[{"kind":"hashtag","text":"#solo","freq":1}]}]})";
    auto parsed = parse_snapshot_line(line);
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->clusters.size() == 1);
    CHECK(parsed->clusters[0].entities.size() == 1);
}

TEST_CASE("load_snapshots names the offending line") {
    std::stringstream in("{\"tick\":0,\"dropped\":0,\"clusters\":[]}\ngarbage\n");
    CHECK_THROWS_WITH_AS(load_snapshots(in), "snapshot line 2: invalid JSON",
                         std::runtime_error);
}

TEST_CASE("key=value config parsing with comments") {
    std::stringstream in("# engine settings\nmin_similarity = 0.25\nwindow=5\n\n"
                         "long_window=90 # trailing comment\n");
    auto entries = parse_key_values(in);
    EngineConfig config;
    auto problem = apply_config_entries(config, entries);
    CHECK_FALSE(problem.has_value());
    CHECK(config.min_similarity == doctest::Approx(0.25));
    CHECK(config.window == 5);
    CHECK(config.long_window == 90);
}

TEST_CASE("unknown config keys and bad values are rejected") {
    EngineConfig config;
    auto unknown = apply_config_entries(config, {{"mystery", "1"}});
    REQUIRE(unknown.has_value());
    CHECK(unknown->find("mystery") != std::string::npos);

    auto bad = apply_config_entries(config, {{"window", "ten"}});
    REQUIRE(bad.has_value());
    CHECK(bad->find("window") != std::string::npos);
}

TEST_CASE("csv escaping round-trips tricky fields") {
    std::vector<std::string> fields = {"plain", "with,comma", "with\"quote", "multi\nline", ""};
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line.push_back(',');
        line += csv_escape(fields[i]);
    }
    auto parsed = split_csv_line(line);
    // embedded newline is preserved by the splitter when given the raw line
    REQUIRE(parsed.size() == fields.size());
    for (size_t i = 0; i < fields.size(); ++i) CHECK(parsed[i] == fields[i]);
}
