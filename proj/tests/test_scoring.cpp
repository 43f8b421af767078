#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rankinject/rng.hpp"
#include "rankinject/scoring.hpp"

#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace rankinject;

static PassageStore small_store() {
    PassageStore store;
    store.add({"d1", "", "the flea jumps high over the dog", ""});
    store.add({"d2", "", "a dog sleeps in the house", ""});
    store.add({"d3", "", "fleas and ticks bother the cat", ""});
    store.add({"d4", "", "weather report for the weekend", ""});
    return store;
}

TEST_CASE("idf matches the closed form") {
    PassageStore store;
    store.add({"d1", "", "cat", ""});
    auto index = bm25_build(store);
    // N=1, df=1 -> ln(1 + 0.5/1.5) = ln(4/3)
    REQUIRE(index.idf("cat") == Catch::Approx(std::log(4.0 / 3.0)).epsilon(1e-9));
    REQUIRE(index.idf("dog") == 0.0);
}

TEST_CASE("zero query-term overlap scores exactly zero") {
    auto index = bm25_build(small_store());
    REQUIRE(index.score("flea dog", "unrelated scrambled words entirely") == 0.0);
}

TEST_CASE("query injection makes the score strictly positive") {
    auto index = bm25_build(small_store());
    std::string base = "unrelated scrambled words entirely";
    REQUIRE(index.score("flea dog", base) == 0.0);
    REQUIRE(index.score("flea dog", "flea dog " + base) > 0.0);
}

TEST_CASE("out-of-vocabulary payload terms contribute nothing") {
    auto index = bm25_build(small_store());
    REQUIRE(index.score("zzyzx", "zzyzx zzyzx zzyzx") == 0.0);
}

TEST_CASE("score_all agrees with single-passage scoring") {
    auto store = small_store();
    auto index = bm25_build(store);
    auto all = index.score_all("the flea dog weather");
    for (size_t i = 0; i < store.size(); ++i) {
        REQUIRE(all[i] == index.score("the flea dog weather", store[i].text));
    }
}

TEST_CASE("retrieve rejects non-positive k and empty stores are unbuildable") {
    auto index = bm25_build(small_store());
    REQUIRE_THROWS_AS(index.retrieve("flea", 0), Error);
    PassageStore empty;
    REQUIRE_THROWS_AS(bm25_build(empty), Error);
}

TEST_CASE("retrieve returns only positive-scoring hits in tie-broken order") {
    auto index = bm25_build(small_store());
    auto hits = index.retrieve("flea dog", 10, "q");
    REQUIRE(hits.size() == 2);  // d1 matches both terms, d2 matches "dog"
    REQUIRE(hits[0].rank == 1);
    REQUIRE(hits[1].rank == 2);
    REQUIRE(hits[0].score >= hits[1].score);
    for (const auto& h : hits) REQUIRE(h.score > 0.0);
}

TEST_CASE("rebuilding from the same store is identical") {
    auto store = small_store();
    auto a = bm25_build(store);
    auto b = bm25_build(store);
    auto ha = a.retrieve("the flea dog", 10);
    auto hb = b.retrieve("the flea dog", 10);
    REQUIRE(ha.size() == hb.size());
    for (size_t i = 0; i < ha.size(); ++i) {
        REQUIRE(ha[i].passage_id == hb[i].passage_id);
        REQUIRE(ha[i].score == hb[i].score);
    }
}

TEST_CASE("retrieve equals the brute-force oracle on seeded corpora") {
    for (uint64_t seed : {1ull, 2ull}) {
        auto data = testsupport::synth_corpus(seed, 400, 25);
        auto index = bm25_build(data.store);
        for (const auto& q : data.eval.queries) {
            auto got = index.retrieve(q.text, 100, q.id);
            auto expected = testsupport::brute_force_bm25_topk(data.store, q.text, 100);
            REQUIRE(got.size() == expected.size());
            for (size_t i = 0; i < got.size(); ++i) {
                REQUIRE(got[i].passage_id == expected[i].passage_id);
                REQUIRE(got[i].score == Catch::Approx(expected[i].score).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("removing a query term never increases a document score") {
    auto data = testsupport::synth_corpus(3, 120, 10);
    auto index = bm25_build(data.store);
    Rng rng(14);
    for (const auto& q : data.eval.queries) {
        auto terms = LexicalIndex::query_terms(q.text);
        if (terms.size() < 2) continue;
        auto dropped = terms;
        dropped.erase(dropped.begin() + static_cast<long>(rng.bounded(dropped.size())));
        auto full_query = join(terms, " ");
        auto reduced_query = join(dropped, " ");
        for (int i = 0; i < 20; ++i) {
            const auto& doc = data.store[rng.bounded(data.store.size())];
            REQUIRE(index.score(reduced_query, doc.text) <=
                    index.score(full_query, doc.text) + 1e-12);
        }
    }
}

TEST_CASE("rank_against gives the worst rank among equal scores") {
    // adversarial ties with the rank-1 corpus passage -> rank 2
    REQUIRE(rank_against({5.0, 3.0, 1.0}, 5.0) == 2);
    REQUIRE(rank_against({5.0, 3.0, 1.0}, 6.0) == 1);
    REQUIRE(rank_against({5.0, 3.0, 1.0}, 2.0) == 3);
    REQUIRE(rank_against({}, 1.0) == 1);
    // duplicating the adversarial score onto a corpus passage never improves it
    REQUIRE(rank_against({5.0, 3.0, 3.0}, 3.0) >= rank_against({5.0, 3.0}, 3.0));
}

TEST_CASE("judge scores validate their range") {
    REQUIRE(JudgeScore(3).value == 3);
    REQUIRE_THROWS_AS(JudgeScore(4), Error);
    REQUIRE_THROWS_AS(JudgeScore(-1), Error);
}

TEST_CASE("bm25 parameters validate") {
    REQUIRE_THROWS_AS((Bm25Params{0.0, 0.4}).validate(), ConfigError);
    REQUIRE_THROWS_AS((Bm25Params{0.9, 1.5}).validate(), ConfigError);
    REQUIRE_NOTHROW((Bm25Params{0.9, 0.4}).validate());
}

TEST_CASE("titles are indexed when enabled") {
    PassageStore store;
    store.add({"d1", "flea biology", "an unrelated body", ""});
    store.add({"d2", "", "another body entirely", ""});
    auto with = bm25_build(store, {}, true);
    auto without = bm25_build(store, {}, false);
    REQUIRE(with.retrieve("flea", 10).size() == 1);
    REQUIRE(without.retrieve("flea", 10).empty());
}
