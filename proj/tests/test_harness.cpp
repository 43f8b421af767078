#include <catch2/catch_amalgamated.hpp>

#include "rankinject/harness.hpp"
#include "rankinject/report.hpp"
#include "rankinject/scorers.hpp"

#include "support/mock_endpoint.hpp"
#include "support/synth.hpp"
#include "support/tempdir.hpp"

using namespace rankinject;

static AttackResult rank_result(int rank_or_zero, const std::string& id = "a") {
    AttackResult r;
    r.adv_id = id;
    r.query_id = "q";
    if (rank_or_zero > 0) {
        r.rank = rank_or_zero;
        r.success_strict = rank_or_zero == 1;
        r.success_relaxed = rank_or_zero <= 5;
    }
    return r;
}

static AttackResult judge_result(int score) {
    AttackResult r;
    r.adv_id = "a";
    r.query_id = "q";
    r.judge_score = score;
    r.success_strict = score == 3;
    r.success_relaxed = score >= 2;
    return r;
}

TEST_CASE("metric arithmetic matches hand-computed fixtures") {
    std::vector<AttackResult> ranks{rank_result(1), rank_result(6), rank_result(3)};
    auto m = compute_metrics(ranks);
    REQUIRE(m.size() == 1);
    REQUIRE(*m[0].strict_rate == Catch::Approx(100.0 / 3.0));
    REQUIRE(*m[0].relaxed_rate == Catch::Approx(200.0 / 3.0));

    std::vector<AttackResult> judges{judge_result(3), judge_result(2), judge_result(1)};
    auto jm = compute_metrics(judges);
    REQUIRE(*jm[0].strict_rate == Catch::Approx(100.0 / 3.0));
    REQUIRE(*jm[0].relaxed_rate == Catch::Approx(200.0 / 3.0));
}

TEST_CASE("strict success implies relaxed success in every result") {
    auto data = testsupport::synth_corpus(21, 300, 10);
    auto pools = build_pools(data.store, AdmissibilityRule{}, 21);
    auto bank = build_word_bank(data.store);
    GridConfig grid;
    grid.injection_kinds = {PayloadKind::query};
    grid.reps = {1, 2, 3};
    auto set = build_attack_set(data.eval, data.store, pools.passages, pools.sentences, bank,
                                grid, 22);
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(data.store));
    Bm25Retriever scorer("bm25", index, data.store);
    auto results = run_retriever_attack(scorer, data.eval, materialize_all(set.instances));
    REQUIRE(results.size() == set.instances.size());
    for (const auto& r : results) {
        REQUIRE_FALSE(r.failed());
        if (r.success_strict) REQUIRE(r.success_relaxed);
    }
}

TEST_CASE("grouped rates reconcile exactly with the ungrouped rate") {
    std::vector<AttackResult> results;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        auto r = rank_result(1 + static_cast<int>(rng.bounded(10)), "a" + std::to_string(i));
        r.reps = 1 + static_cast<int>(rng.bounded(3));
        results.push_back(r);
    }
    auto overall = compute_metrics(results);
    auto grouped = compute_metrics(results, {"reps"});
    double weighted_strict = 0, weighted_relaxed = 0;
    size_t total = 0;
    for (const auto& g : grouped) {
        weighted_strict += *g.strict_rate * static_cast<double>(g.n);
        weighted_relaxed += *g.relaxed_rate * static_cast<double>(g.n);
        total += g.n;
    }
    REQUIRE(total == 200);
    REQUIRE(weighted_strict / total == Catch::Approx(*overall[0].strict_rate).epsilon(1e-12));
    REQUIRE(weighted_relaxed / total == Catch::Approx(*overall[0].relaxed_rate).epsilon(1e-12));
}

TEST_CASE("failed instances are excluded from rates but reported") {
    std::vector<AttackResult> results{rank_result(1), rank_result(2)};
    AttackResult failed;
    failed.adv_id = "f";
    failed.query_id = "q";
    failed.failure_reason = "transport: boom";
    failed.reps = 2;
    results.push_back(failed);
    auto m = compute_metrics(results);
    REQUIRE(m[0].n == 2);
    REQUIRE(m[0].failed == 1);
    REQUIRE(*m[0].strict_rate == Catch::Approx(50.0));

    // a group containing only failures carries no rates; others are unaffected
    auto grouped = compute_metrics(results, {"reps"});
    bool saw_failed_group = false;
    for (const auto& g : grouped) {
        if (g.group.at("reps") == "2") {
            REQUIRE(g.n == 0);
            REQUIRE_FALSE(g.strict_rate.has_value());
            saw_failed_group = true;
        }
    }
    REQUIRE(saw_failed_group);

    std::vector<AttackResult> all_failed{failed};
    REQUIRE_THROWS_AS(compute_metrics(all_failed), Error);
}

TEST_CASE("tie-break: an adversarial passage tying the top passage ranks second") {
    PassageStore store;
    store.add({"d1", "", "flea biology research", ""});
    store.add({"d2", "", "unrelated text entirely", ""});
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(store));
    Bm25Retriever scorer("bm25", index, store);
    // identical text scores identically: worst rank among equals
    auto rank = scorer.rank_added({"q1", "flea biology research"}, "flea biology research");
    REQUIRE(rank == 2);
    // a clearly better passage ranks first
    auto best = scorer.rank_added({"q1", "flea biology research"},
                                  "flea biology research flea biology research flea");
    REQUIRE(best == 1);
}

TEST_CASE("zero-score adversarial passages are unranked") {
    PassageStore store;
    store.add({"d1", "", "flea biology research", ""});
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(store));
    Bm25Retriever scorer("bm25", index, store);
    REQUIRE_FALSE(scorer.rank_added({"q1", "flea"}, "no overlap here").has_value());
}

TEST_CASE("results are independent of evaluation order") {
    auto data = testsupport::synth_corpus(23, 200, 6);
    auto pools = build_pools(data.store, AdmissibilityRule{}, 23);
    auto bank = build_word_bank(data.store);
    GridConfig grid;
    grid.injection_kinds = {PayloadKind::query};
    grid.positions = {Position::middle};
    auto set = build_attack_set(data.eval, data.store, pools.passages, pools.sentences, bank,
                                grid, 24);
    auto attacks = materialize_all(set.instances);
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(data.store));
    Bm25Retriever scorer("bm25", index, data.store);
    auto forward = run_retriever_attack(scorer, data.eval, attacks);

    auto shuffled = attacks;
    Rng rng(9);
    rng.shuffle(shuffled);
    Bm25Retriever scorer2("bm25", index, data.store);
    auto reordered = run_retriever_attack(scorer2, data.eval, shuffled);

    std::map<std::string, std::optional<int>> by_id;
    for (const auto& r : reordered) by_id[r.adv_id] = r.rank;
    for (const auto& r : forward) {
        REQUIRE(by_id.count(r.adv_id) == 1);
        REQUIRE(by_id[r.adv_id] == r.rank);
    }
}

TEST_CASE("reranker pipeline ranks within BM25 top-100 plus the adversarial passage") {
    testsupport::MockEndpoint mock;
    auto data = testsupport::synth_corpus(25, 150, 4);
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(data.store));
    EndpointConfig endpoint;
    endpoint.base_url = mock.base_url();
    endpoint.backoff_s = 0;
    RerankPipeline pipeline("rr", RerankClient(endpoint), index, data.store);
    const auto& q = data.eval.queries[0];
    // exact query present -> +0.5 on the mock rubric: should beat every candidate
    auto rank = pipeline.rank_added(q, q.text + " and some padding words");
    REQUIRE(rank == 1);
    // one batch call for candidates + one for the adversarial passage
    REQUIRE(mock.rerank_requests.load() == 2);
    // second instance for the same query reuses the cached candidate scores
    pipeline.rank_added(q, "unrelated words only");
    REQUIRE(mock.rerank_requests.load() == 3);
}

TEST_CASE("judge attacks mark parse failures as failed instances") {
    testsupport::MockEndpoint mock;
    auto data = testsupport::synth_corpus(26, 80, 2);
    auto pools = build_pools(data.store, AdmissibilityRule{}, 26);
    auto bank = build_word_bank(data.store);
    GridConfig grid;
    grid.injection_kinds = {PayloadKind::query};
    grid.samples_per_query = 1;
    auto set = build_attack_set(data.eval, data.store, pools.passages, pools.sentences, bank,
                                grid, 27);
    auto attacks = materialize_all(set.instances);
    EndpointConfig endpoint;
    endpoint.base_url = mock.base_url();
    endpoint.backoff_s = 0;
    JudgeScorer judge("j", JudgeClient(endpoint));
    RunOptions opts;
    opts.max_in_flight = 1;
    auto results = run_judge_attack(judge, data.eval, attacks, opts);
    for (const auto& r : results) {
        REQUIRE_FALSE(r.failed());
        REQUIRE(r.judge_score.has_value());
        // query injection embeds the full query: the mock grades it 3
        REQUIRE(*r.judge_score == 3);
    }

    mock.garbage_next(1000);  // every reply unparseable: 3 attempts each, all fail
    auto failed = run_judge_attack(judge, data.eval, attacks, opts);
    mock.garbage_next(0);
    for (const auto& r : failed) {
        REQUIRE(r.failed());
        REQUIRE(r.failure_reason->find("judge-parse") != std::string::npos);
    }
}

TEST_CASE("overlap analysis reproduces hand-computed region counts") {
    std::vector<std::pair<std::string, std::set<std::string>>> sets{
        {"A", {"1", "2"}}, {"B", {"2", "3"}}, {"C", {"2"}}};
    auto counts = overlap_analysis(sets);
    REQUIRE(counts.regions.at("A&B&C") == 1);
    REQUIRE(counts.regions.at("A") == 1);
    REQUIRE(counts.regions.at("B") == 1);
    REQUIRE(counts.regions.at("C") == 0);
    REQUIRE(counts.regions.at("A&B") == 0);
    REQUIRE(counts.regions.at("A&C") == 0);
    REQUIRE(counts.regions.at("B&C") == 0);
    size_t sum = 0;
    for (const auto& [_, c] : counts.regions) sum += c;
    REQUIRE(sum == counts.union_size);
    REQUIRE(counts.union_size == 3);
}

TEST_CASE("overlap handles disjoint, identical and invalid inputs") {
    std::set<std::string> a{"1"}, b{"2"};
    auto disjoint = overlap_analysis({{"A", a}, {"B", b}});
    REQUIRE(disjoint.regions.at("A&B") == 0);
    REQUIRE(disjoint.union_size == 2);

    auto identical = overlap_analysis({{"A", a}, {"B", a}, {"C", a}});
    REQUIRE(identical.regions.at("A&B&C") == 1);
    REQUIRE(identical.regions.at("A") == 0);

    REQUIRE_THROWS_AS(overlap_analysis({{"A", a}}), Error);
    auto csv = overlap_csv(disjoint);
    REQUIRE(csv.find("region,count") == 0);
    REQUIRE(csv.find("union,2") != std::string::npos);
}

TEST_CASE("seo scenario promotes the rank-5 passage or counts skips") {
    auto data = testsupport::synth_corpus(31, 400, 8);
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(data.store));
    Bm25Retriever scorer("bm25", index, data.store);
    auto report = seo_scenario(scorer, data.eval, data.store);
    REQUIRE(report.n + report.failed == data.eval.queries.size());
    if (report.n > 0) {
        REQUIRE(*report.strict_rate >= 0.0);
        REQUIRE(*report.relaxed_rate >= *report.strict_rate);
    }
}

TEST_CASE("seo scenario skips queries with fewer than five results") {
    PassageStore store;
    store.add({"d1", "", "flea facts one", ""});
    store.add({"d2", "", "flea facts two", ""});
    store.add({"d3", "", "nothing else", ""});
    EvalSet eval;
    eval.queries.push_back({"q1", "flea"});
    eval.qrels.add({"q1", "d1", 2});
    auto index = std::make_shared<LexicalIndex>(LexicalIndex::build(store));
    Bm25Retriever scorer("bm25", index, store);
    auto report = seo_scenario(scorer, eval, store);
    REQUIRE(report.n == 0);
    REQUIRE(report.failed == 1);
}

TEST_CASE("judge seo promotes score-2 passages and tracks demotions") {
    testsupport::MockEndpoint mock;
    auto data = testsupport::synth_corpus(32, 120, 5);
    EndpointConfig endpoint;
    endpoint.base_url = mock.base_url();
    endpoint.backoff_s = 0;
    JudgeScorer judge("j", JudgeClient(endpoint));
    auto report = seo_scenario_judge(judge, data.eval, data.store);
    REQUIRE(report.n + report.failed == data.eval.queries.size());
    if (report.n > 0) {
        // injecting the exact query makes the mock grade 3
        REQUIRE(*report.strict_rate == Catch::Approx(100.0));
        REQUIRE(*report.demotion_rate == Catch::Approx(0.0));
    }
}

TEST_CASE("results JSONL round trips") {
    testsupport::TempDir tmp;
    std::vector<AttackResult> results{rank_result(1, "x"), rank_result(7, "y"), judge_result(2)};
    results[2].failure_reason.reset();
    auto path = tmp.sub("r.jsonl");
    save_results_jsonl(results, path);
    auto loaded = load_results_jsonl(path);
    REQUIRE(loaded.size() == results.size());
    for (size_t i = 0; i < results.size(); ++i)
        REQUIRE(to_json(loaded[i]).dump() == to_json(results[i]).dump());
}

TEST_CASE("trec run lines carry qid Q0 docid rank score runtag") {
    testsupport::TempDir tmp;
    auto path = tmp.sub("run.trec");
    write_trec_run({{"q1", "d9", 1.25, 1}, {"q1", "d3", 0.5, 2}}, "tag", path);
    auto content = read_file(path);
    REQUIRE(content == "q1 Q0 d9 1 1.250000 tag\nq1 Q0 d3 2 0.500000 tag\n");
}

TEST_CASE("rank report renders deterministic tables with strict/relaxed cells") {
    std::vector<AttackResult> results;
    for (int reps = 1; reps <= 3; ++reps) {
        for (int i = 0; i < 4; ++i) {
            auto r = rank_result(i == 0 ? 1 : 6, "id" + std::to_string(reps * 10 + i));
            r.reps = reps;
            r.payload_kind = PayloadKind::query;
            r.base_kind = BaseKind::scrambled;
            r.position = Position::start;
            results.push_back(r);
        }
    }
    std::map<std::string, std::vector<MetricReport>> by_scorer;
    by_scorer["bm25"] = compute_metrics(results, {"payload", "base", "position", "reps"});
    RunMeta meta;
    meta.seed = 7;
    meta.config_hash = "cafe";
    auto a = render_rank_report(ReportLayout::repetition, by_scorer, meta);
    auto b = render_rank_report(ReportLayout::repetition, by_scorer, meta);
    REQUIRE(a.csv == b.csv);
    REQUIRE(a.markdown == b.markdown);
    REQUIRE(a.csv.find("# seed=7") != std::string::npos);
    REQUIRE(a.csv.find("query/scrambled x1") != std::string::npos);
    REQUIRE(a.csv.find("25.0/25.0") != std::string::npos);
    REQUIRE(a.markdown.find("| bm25 |") != std::string::npos);
}

TEST_CASE("location layout keeps reps=1 rows and orders start/middle/end") {
    std::vector<AttackResult> results;
    for (auto pos : {Position::start, Position::middle, Position::end}) {
        for (int reps : {1, 2}) {
            auto r = rank_result(1);
            r.adv_id = std::string(to_string(pos)) + std::to_string(reps);
            r.position = pos;
            r.reps = reps;
            results.push_back(r);
        }
    }
    std::map<std::string, std::vector<MetricReport>> by_scorer;
    by_scorer["s"] = compute_metrics(results, {"payload", "base", "position", "reps"});
    auto rendered = render_rank_report(ReportLayout::location, by_scorer, RunMeta{});
    const auto start = rendered.csv.find("query/random start");
    const auto middle = rendered.csv.find("query/random middle");
    const auto end = rendered.csv.find("query/random end");
    REQUIRE(start != std::string::npos);
    REQUIRE(middle != std::string::npos);
    REQUIRE(end != std::string::npos);
    REQUIRE(start < middle);
    REQUIRE(middle < end);
}

TEST_CASE("generated layout lines up corpus-relevant and gen columns") {
    std::vector<AttackResult> results;
    auto add = [&](std::optional<int> gen, const std::string& id) {
        auto r = rank_result(1, id);
        r.payload_kind = PayloadKind::sentence;
        r.base_kind = gen ? BaseKind::generated : BaseKind::relevant;
        r.gen_target_words = gen;
        results.push_back(r);
    };
    add(std::nullopt, "rel");
    add(50, "g50");
    add(100, "g100");
    add(200, "g200");
    std::map<std::string, std::vector<MetricReport>> by_scorer;
    by_scorer["s"] = compute_metrics(results, {"payload", "base", "position", "reps"});
    auto rendered = render_rank_report(ReportLayout::generated, by_scorer, RunMeta{});
    const auto rel = rendered.csv.find("relevant");
    const auto g50 = rendered.csv.find("gen-50");
    const auto g100 = rendered.csv.find("gen-100");
    const auto g200 = rendered.csv.find("gen-200");
    REQUIRE(rel < g50);
    REQUIRE(g50 < g100);
    REQUIRE(g100 < g200);
}

TEST_CASE("empty layout cells render as an en dash") {
    MetricReport empty;
    empty.n = 0;
    REQUIRE(format_cell(empty) == std::string(kEmptyCell));
}
