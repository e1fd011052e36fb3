#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "evd/trend_detector.hpp"

using namespace evd;

namespace {

struct TrendFixture {
    std::shared_ptr<EntityTable> table = std::make_shared<EntityTable>();
    DomainId us = 0;
    uint32_t next_author = 0;

    EntityId id(const std::string& text) {
        return table->intern(Entity{EntityKind::named_entity, text});
    }

    void ingest(TrendDetector& td, int64_t tick, std::vector<std::string> texts,
                std::optional<AuthorId> author = std::nullopt) {
        std::vector<EntityId> ids;
        for (const auto& t : texts) ids.push_back(id(t));
        td.ingest(tick, us, author.value_or(next_author++), ids);
    }
};

// Independent recount of the windows and Eq. 1 scoring for one domain.
struct TrendOracle {
    // corpus[tick] = list of entity-text sets (one per document)
    std::map<int64_t, std::vector<std::vector<std::string>>> corpus;
    int64_t short_window, long_window, top_k;

    std::vector<std::pair<std::string, double>> ranked_at(int64_t tick) const {
        std::map<std::string, uint64_t> short_counts, long_counts;
        uint64_t short_total = 0, long_total = 0;
        for (const auto& [t, docs] : corpus) {
            bool in_long = t > tick - long_window && t <= tick;
            bool in_short = t > tick - short_window && t <= tick;
            if (!in_long) continue;
            for (const auto& doc : docs) {
                for (const auto& text : doc) {
                    ++long_counts[text];
                    ++long_total;
                    if (in_short) {
                        ++short_counts[text];
                        ++short_total;
                    }
                }
            }
        }
        std::vector<std::pair<std::string, double>> scored;
        for (const auto& [text, observed] : short_counts) {
            double expected = static_cast<double>(short_total) /
                              static_cast<double>(long_total) *
                              static_cast<double>(long_counts[text]);
            scored.emplace_back(text, static_cast<double>(observed) / (expected + 1.0));
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (scored.size() > static_cast<size_t>(top_k)) scored.resize(static_cast<size_t>(top_k));
        return scored;
    }
};

}  // namespace

TEST_CASE("single document increments counts once per entity") {
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    fx.ingest(td, 0, {"a", "b"});
    td.trend_tick(0);
    CHECK(td.short_count(fx.us, fx.id("a")) == 1);
    CHECK(td.short_count(fx.us, fx.id("b")) == 1);
    CHECK(td.short_total(fx.us) == 2);
    CHECK(td.long_total(fx.us) == 2);
}

TEST_CASE("example tweet corpus counts") {
    // three documents: {iphone,#appleevent}, {tim cook,iphone,#appleevent},
    // {tim cook,iphone}
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    fx.ingest(td, 0, {"iphone", "#appleevent"});
    fx.ingest(td, 0, {"tim cook", "iphone", "#appleevent"});
    fx.ingest(td, 0, {"tim cook", "iphone"});
    CHECK(td.long_count(fx.us, fx.id("iphone")) == 3);
    CHECK(td.long_count(fx.us, fx.id("#appleevent")) == 2);
    CHECK(td.long_count(fx.us, fx.id("tim cook")) == 2);
    CHECK(td.long_total(fx.us) == 7);
}

TEST_CASE("same author within the short window contributes once") {
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    fx.ingest(td, 0, {"a"}, AuthorId{7});
    fx.ingest(td, 1, {"a"}, AuthorId{7});
    CHECK(td.long_count(fx.us, fx.id("a")) == 1);
    CHECK(td.throttled() == 1);

    // outside the short window the same author counts again
    fx.ingest(td, 6, {"a"}, AuthorId{7});
    CHECK(td.long_count(fx.us, fx.id("a")) == 2);
    CHECK(td.throttled() == 1);
}

TEST_CASE("expected count follows the window ratio") {
    // old buckets: e=50, filler=850; recent: f=20 within old long too (30
    // old), filler2=80. N_s(d)=100, N_l(d)=1000, N_l(d,e)=50, N_l(d,f)=50.
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    for (int i = 0; i < 50; ++i) fx.ingest(td, 0, {"e"});
    for (int i = 0; i < 30; ++i) fx.ingest(td, 0, {"f"});
    for (int i = 0; i < 820; ++i) fx.ingest(td, 0, {"filler"});
    for (int i = 0; i < 20; ++i) fx.ingest(td, 10, {"f"});
    for (int i = 0; i < 80; ++i) fx.ingest(td, 10, {"filler2"});
    td.trend_tick(10);

    REQUIRE(td.short_total(fx.us) == 100);
    REQUIRE(td.long_total(fx.us) == 1000);
    auto expected_e = td.expected_count(fx.us, fx.id("e"));
    REQUIRE(expected_e.has_value());
    CHECK(*expected_e == doctest::Approx(5.0).epsilon(1e-12));

    // score = observed / (expected + 1) = 20 / 6
    auto score_f = td.score(fx.us, fx.id("f"));
    REQUIRE(score_f.has_value());
    CHECK(*score_f == doctest::Approx(20.0 / 6.0).epsilon(1e-12));

    // never-seen entity: expected 0, score 0
    auto expected_z = td.expected_count(fx.us, fx.id("zzz"));
    REQUIRE(expected_z.has_value());
    CHECK(*expected_z == 0.0);
    CHECK(*td.score(fx.us, fx.id("zzz")) == 0.0);
}

TEST_CASE("expected count is undefined for an unknown domain") {
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    CHECK_FALSE(td.expected_count(DomainId{9}, fx.id("a")).has_value());
    CHECK_FALSE(td.score(DomainId{9}, fx.id("a")).has_value());
}

TEST_CASE("ratio-one window makes expected equal the long count") {
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    for (int i = 0; i < 4; ++i) fx.ingest(td, 0, {"a"});
    td.trend_tick(0);  // everything inside both windows
    CHECK(*td.expected_count(fx.us, fx.id("a")) == doctest::Approx(4.0));
}

TEST_CASE("trend_tick on empty windows yields an empty snapshot") {
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    TrendSnapshot snap = td.trend_tick(5);
    CHECK(snap.empty());
    CHECK(snap.all_trending().empty());
}

TEST_CASE("trend_tick sorts by score and truncates to top_k") {
    TrendFixture fx;
    TrendDetector td({5, 60, 2}, fx.table);
    // long-history for three entities, then a short burst with different rates
    for (int i = 0; i < 40; ++i) {
        fx.ingest(td, 0, {"a"});
        fx.ingest(td, 0, {"b"});
        fx.ingest(td, 0, {"c"});
    }
    for (int i = 0; i < 30; ++i) fx.ingest(td, 30, {"a"});
    for (int i = 0; i < 10; ++i) fx.ingest(td, 30, {"b"});
    for (int i = 0; i < 2; ++i) fx.ingest(td, 30, {"c"});
    TrendSnapshot snap = td.trend_tick(30);

    REQUIRE(snap.has_domain(fx.us));
    const auto& list = snap.per_domain().at(fx.us);
    REQUIRE(list.size() == 2);  // top_k
    CHECK(list[0].first == fx.id("a"));
    CHECK(list[1].first == fx.id("b"));
    CHECK(list[0].second > list[1].second);
    CHECK(snap.is_trending(fx.us, fx.id("a")));
    CHECK_FALSE(snap.is_trending(fx.us, fx.id("c")));
}

TEST_CASE("burst corpus matches brute-force recount") {
    // X flat at 10/min for 60 minutes then 100/min for 5; five background
    // entities flat at 50/min keep the top-3 list full before the burst.
    TrendOracle oracle;
    oracle.short_window = 5;
    oracle.long_window = 60;
    oracle.top_k = 3;
    for (int64_t t = 0; t < 65; ++t) {
        auto& docs = oracle.corpus[t];
        int x_rate = t < 60 ? 10 : 100;
        for (int i = 0; i < x_rate; ++i) docs.push_back({"x"});
        for (int b = 0; b < 5; ++b) {
            for (int i = 0; i < 50; ++i) docs.push_back({"bg" + std::to_string(b)});
        }
    }

    TrendFixture fx;
    TrendDetector td({oracle.short_window, oracle.long_window, oracle.top_k}, fx.table);
    std::mt19937_64 rng(7);
    for (int64_t t = 0; t < 65; ++t) {
        auto docs = oracle.corpus[t];
        std::shuffle(docs.begin(), docs.end(), rng);  // order inside a minute is free
        for (const auto& doc : docs) fx.ingest(td, t, doc);

        TrendSnapshot snap = td.trend_tick(t);
        auto expected = oracle.ranked_at(t);
        REQUIRE(snap.has_domain(fx.us));
        const auto& got = snap.per_domain().at(fx.us);
        REQUIRE(got.size() == expected.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(fx.table->entity(got[i].first).text == expected[i].first);
            CHECK(got[i].second == doctest::Approx(expected[i].second).epsilon(1e-12));
        }

        bool x_listed = snap.is_trending(fx.us, fx.id("x"));
        if (t < 60) {
            CHECK_FALSE(x_listed);
        } else {
            CHECK(x_listed);
        }
    }
}

TEST_CASE("window aggregates equal a recount under random traffic") {
    TrendOracle oracle;
    oracle.short_window = 3;
    oracle.long_window = 8;
    oracle.top_k = 100;
    std::mt19937_64 rng(11);

    TrendFixture fx;
    TrendDetector td({oracle.short_window, oracle.long_window, oracle.top_k}, fx.table);
    for (int64_t t = 0; t < 30; ++t) {
        auto& docs = oracle.corpus[t];
        size_t n = rng() % 20;
        for (size_t i = 0; i < n; ++i) {
            docs.push_back({"e" + std::to_string(rng() % 6)});
        }
        for (const auto& doc : docs) fx.ingest(td, t, doc);
        td.trend_tick(t);

        // compare aggregates against the recount
        std::map<std::string, uint64_t> short_counts, long_counts;
        for (const auto& [bt, bdocs] : oracle.corpus) {
            for (const auto& doc : bdocs) {
                for (const auto& text : doc) {
                    if (bt > t - oracle.long_window && bt <= t) ++long_counts[text];
                    if (bt > t - oracle.short_window && bt <= t) ++short_counts[text];
                }
            }
        }
        for (int e = 0; e < 6; ++e) {
            std::string text = "e" + std::to_string(e);
            CHECK(td.long_count(fx.us, fx.id(text)) == long_counts[text]);
            CHECK(td.short_count(fx.us, fx.id(text)) == short_counts[text]);
        }
    }
}

TEST_CASE("eviction subtracts exactly what ingestion added") {
    TrendFixture fx;
    TrendDetector td({3, 6, 10}, fx.table);
    auto ingest_minute = [&](int64_t tick) {
        fx.ingest(td, tick, {"a", "b"});
        fx.ingest(td, tick, {"a"});
        fx.ingest(td, tick, {"c", "a", "b"});
    };
    ingest_minute(0);
    td.trend_tick(0);
    uint64_t a0 = td.long_count(fx.us, fx.id("a"));
    uint64_t total0 = td.long_total(fx.us);
    REQUIRE(a0 == 3);
    REQUIRE(total0 == 6);

    // advance far enough that everything leaves both windows
    td.trend_tick(10);
    CHECK(td.long_total(fx.us) == 0);
    CHECK(td.long_count(fx.us, fx.id("a")) == 0);
    CHECK(td.trend_tick(10).empty());

    // the identical traffic rebuilds the identical counts
    ingest_minute(11);
    td.trend_tick(11);
    CHECK(td.long_count(fx.us, fx.id("a")) == a0);
    CHECK(td.long_total(fx.us) == total0);
    CHECK(td.short_count(fx.us, fx.id("b")) == 2);
}

TEST_CASE("score is non-decreasing in the observed count for equal history") {
    // y's mentions are old (outside the short window), z's recent; equal
    // long-window history, different observed counts.
    TrendFixture fx;
    TrendDetector td({5, 60, 10}, fx.table);
    for (int i = 0; i < 10; ++i) fx.ingest(td, 0, {"y"});
    for (int i = 0; i < 10; ++i) fx.ingest(td, 20, {"z"});
    td.trend_tick(20);
    CHECK(*td.expected_count(fx.us, fx.id("y")) == *td.expected_count(fx.us, fx.id("z")));
    CHECK(*td.score(fx.us, fx.id("z")) > *td.score(fx.us, fx.id("y")));
}
