// rankinject: synthesize content-injection attacks, evaluate them against
// pluggable relevance scorers, and train/evaluate the injection detector.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankinject/attackgen.hpp"
#include "rankinject/clients.hpp"
#include "rankinject/config.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/defense.hpp"
#include "rankinject/harness.hpp"
#include "rankinject/report.hpp"
#include "rankinject/scorers.hpp"
#include "rankinject/scoring.hpp"
#include "rankinject/textkit.hpp"

namespace fs = std::filesystem;
using namespace rankinject;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::string out_dir;
    std::string mock_endpoint;
    int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--set", args.overrides, "override a config key: --set key=value");
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)");
    cmd->add_option("--mock-endpoint", args.mock_endpoint,
                    "test mode: point every remote endpoint at this URL");
}

// Loaded configuration plus stable storage for custom word lists.
struct Workspace {
    RunConfig config;
    std::optional<WordList> custom_stopwords, custom_verbs, custom_nouns;
    const StopwordList* stopwords = &bundled_stopwords();
    AdmissibilityRule rule;
    RunMeta meta;

    const StopwordList& stops() const { return *stopwords; }
};

Workspace open_workspace(const CommonArgs& args, const std::string& subcommand) {
    auto json = load_config_json(args.config_path);
    for (const auto& pair : args.overrides) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got \"" + pair + "\"");
        apply_override(json, pair.substr(0, eq), pair.substr(eq + 1));
    }
    if (args.seed >= 0) json["master_seed"] = args.seed;
    if (!args.out_dir.empty()) json["output_dir"] = args.out_dir;
    if (!args.mock_endpoint.empty()) {
        if (json.contains("scorers")) {
            for (auto& s : json["scorers"]) {
                if (s.value("kind", "") != "bm25") s["endpoint"] = args.mock_endpoint;
            }
        }
        if (!json.contains("generation")) json["generation"] = nlohmann::json::object();
        json["generation"]["endpoint"] = args.mock_endpoint;
    }

    Workspace ws;
    ws.config = parse_config(json);
    if (!ws.config.stopwords_path.empty()) {
        ws.custom_stopwords = WordList::from_file(ws.config.stopwords_path);
        ws.stopwords = &*ws.custom_stopwords;
    }
    ws.rule.min_chars = ws.config.admissibility_min_chars;
    ws.rule.max_chars = ws.config.admissibility_max_chars;
    ws.rule.min_words = ws.config.admissibility_min_words;
    if (!ws.config.verbs_path.empty()) {
        ws.custom_verbs = WordList::from_file(ws.config.verbs_path);
        ws.rule.verb_lexicon = &*ws.custom_verbs;
    }
    if (!ws.config.nouns_path.empty()) {
        ws.custom_nouns = WordList::from_file(ws.config.nouns_path);
        ws.rule.noun_lexicon = &*ws.custom_nouns;
    }
    ws.rule.validate();

    ws.meta.seed = ws.config.master_seed;
    ws.meta.config_hash = config_hash(ws.config.raw);
    for (const auto& s : ws.config.scorers)
        ws.meta.scorer_ids.push_back(s.name + ":" + std::string(to_string(s.kind)));

    fs::create_directories(ws.config.output_dir);
    nlohmann::json manifest{{"subcommand", subcommand},
                            {"seed", ws.config.master_seed},
                            {"config", ws.meta.config_hash},
                            {"scorers", ws.meta.scorer_ids},
                            {"tool", std::string(kToolVersion)}};
    write_file((fs::path(ws.config.output_dir) / ("manifest_" + subcommand + ".json")).string(),
               manifest.dump(2) + "\n");
    return ws;
}

std::string out_path(const Workspace& ws, const std::string& name) {
    return (fs::path(ws.config.output_dir) / name).string();
}

EvalSet load_eval(const Workspace& ws) {
    if (ws.config.queries_path.empty() || ws.config.qrels_path.empty())
        throw ConfigError("queries and qrels paths are required for this subcommand");
    auto eval = load_eval_set(ws.config.queries_path, ws.config.qrels_path,
                              ws.config.min_relevant_grade);
    for (const auto& w : eval.warnings) std::cerr << "warning: " << w << "\n";
    return eval;
}

PassageStore load_store(const Workspace& ws, const EvalSet* eval) {
    if (ws.config.corpus_path.empty())
        throw ConfigError("corpus.path is required for this subcommand");
    auto store =
        load_corpus(ws.config.corpus_path, ws.config.corpus_format, ws.config.source_tag);
    if (ws.config.corpus_subsample > 0 && ws.config.corpus_subsample < store.size()) {
        std::vector<std::string> force;
        if (eval && ws.config.force_include_qrels) {
            for (const auto& e : eval->qrels.entries()) force.push_back(e.passage_id);
        }
        store = subsample_store(store, ws.config.corpus_subsample, ws.config.master_seed, force);
    }
    return store;
}

std::shared_ptr<const LexicalIndex> build_index(const Workspace& ws, const PassageStore& store) {
    return std::make_shared<LexicalIndex>(
        LexicalIndex::build(store, ws.config.bm25, ws.config.include_titles));
}

GridConfig grid_from(const Workspace& ws) {
    GridConfig grid;
    grid.injection_kinds = ws.config.injection_kinds;
    grid.base_kinds = ws.config.base_kinds;
    grid.positions = ws.config.positions;
    grid.reps = ws.config.reps;
    grid.samples_per_query = ws.config.samples_per_query;
    grid.scatter = ws.config.scatter;
    return grid;
}

// Sentence-injection bases per query, per attack.relevant_source.
std::map<std::string, std::vector<RelevantBase>> relevant_bases(
    const Workspace& ws, const PassageStore& store, const EvalSet& eval,
    const std::shared_ptr<const LexicalIndex>& index) {
    std::map<std::string, std::vector<RelevantBase>> out;
    if (ws.config.relevant_source == "qrels") {
        for (const auto& q : eval.queries) {
            for (const auto* qrel : eval.relevant(q.id)) {
                if (const Passage* p = store.find(qrel->passage_id)) {
                    out[q.id].push_back({p->id, p->text, std::nullopt});
                    break;
                }
            }
        }
    } else if (ws.config.relevant_source == "generated") {
        if (!ws.config.generation_configured)
            throw ConfigError("attack.relevant_source=generated needs a generation endpoint");
        GenerationClient client(ws.config.generation);
        for (const auto& q : eval.queries) {
            for (int target : ws.config.generation_targets) {
                auto g = client.generate(q, target);
                if (g.off_target)
                    std::cerr << "warning: generated passage for " << q.id << " target " << target
                              << " is off-target (" << g.word_count << " words)\n";
                out[q.id].push_back(
                    {"gen-" + q.id + "-" + std::to_string(target), g.text, target});
            }
        }
    } else {  // bm25-top1: treat the scorer's top passage as relevant
        for (const auto& q : eval.queries) {
            auto top = index->retrieve(q.text, 1, q.id);
            if (top.empty()) continue;
            const Passage* p = store.find(top[0].passage_id);
            if (p) out[q.id].push_back({p->id, p->text, std::nullopt});
        }
    }
    return out;
}

std::unique_ptr<RetrievalScorer> make_rank_scorer(const Workspace& ws, const ScorerConfig& sc,
                                                  const PassageStore& store,
                                                  std::shared_ptr<const LexicalIndex>& index) {
    switch (sc.kind) {
        case ScorerKind::bm25:
            if (!index) index = build_index(ws, store);
            return std::make_unique<Bm25Retriever>(sc.name, index, store);
        case ScorerKind::embedding:
            return std::make_unique<EmbeddingRetriever>(
                sc.name, EmbeddingClient(sc.endpoint),
                out_path(ws, "embeddings_" + sc.name + ".cache"), store,
                ws.config.include_titles);
        case ScorerKind::reranker:
            if (!index) index = build_index(ws, store);
            return std::make_unique<RerankPipeline>(sc.name, RerankClient(sc.endpoint), index,
                                                    store);
        default:
            throw ConfigError("scorer \"" + sc.name + "\" is a judge; use the judge subcommand");
    }
}

const ScorerConfig& require_scorer(const Workspace& ws, const std::string& name) {
    const ScorerConfig* sc = ws.config.find_scorer(name);
    if (!sc) throw ConfigError("no scorer named \"" + name + "\" in config");
    return *sc;
}

void write_metrics(const Workspace& ws, const std::string& name,
                   const std::vector<AttackResult>& results) {
    auto metrics = compute_metrics(results, {"payload", "base", "position", "reps"});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& m : metrics) rows.push_back(to_json(m));
    write_file(out_path(ws, "metrics_" + name + ".json"), rows.dump(2) + "\n");
}

void write_baseline_run(const Workspace& ws, RetrievalScorer& scorer, const EvalSet& eval,
                        const std::string& name) {
    std::vector<ScoreRecord> records;
    for (const auto& q : eval.queries) {
        for (auto& r : scorer.top_k(q, 100)) records.push_back(std::move(r));
    }
    write_trec_run(records, name, out_path(ws, "run_" + name + ".trec"));
}

int cmd_ingest(const Workspace& ws) {
    auto eval = load_eval(ws);
    auto store = load_store(ws, &eval);
    nlohmann::json summary{{"passages", store.size()},
                           {"queries", eval.queries.size()},
                           {"qrels", eval.qrels.size()},
                           {"qrel_warnings", eval.warnings.size()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_stats(const Workspace& ws) {
    auto store = load_store(ws, nullptr);
    auto stats = corpus_stats(store);
    nlohmann::json j{{"num_passages", stats.num_passages},
                     {"avg_words", stats.avg_words},
                     {"avg_sentences", stats.avg_sentences}};
    write_file(out_path(ws, "stats.json"), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_pool(const Workspace& ws) {
    auto store = load_store(ws, nullptr);
    auto pools = build_pools(store, ws.rule, ws.config.master_seed, SentenceSource::msmarco,
                             ws.config.pool_limits);
    for (const auto& w : pools.warnings) std::cerr << "warning: " << w << "\n";
    pools.sentences.save_jsonl(out_path(ws, "sentence_pool.jsonl"));
    std::string ids;
    for (const auto& id : pools.passages.passage_ids) ids += id + "\n";
    write_file(out_path(ws, "passage_pool.txt"), ids);
    nlohmann::json summary{{"eligible_passages", pools.passages.size()},
                           {"admissible_sentences", pools.sentences.size()}};
    if (!ws.config.toxigen_path.empty()) {
        size_t dropped = 0;
        auto toxigen = SentencePool::load_jsonl(ws.config.toxigen_path, ws.rule, &dropped);
        summary["toxigen_sentences"] = toxigen.size();
        summary["toxigen_dropped"] = dropped;
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_attack(const Workspace& ws) {
    auto eval = load_eval(ws);
    auto store = load_store(ws, &eval);
    auto pools = build_pools(store, ws.rule, ws.config.master_seed, SentenceSource::msmarco,
                             ws.config.pool_limits);
    auto bank = build_word_bank(store);
    auto grid = grid_from(ws);
    bool wants_sentences = false;
    for (auto k : grid.injection_kinds) wants_sentences |= k == PayloadKind::sentence;
    std::shared_ptr<const LexicalIndex> index;
    if (wants_sentences) {
        if (ws.config.relevant_source == "bm25-top1") index = build_index(ws, store);
        grid.relevant_bases = relevant_bases(ws, store, eval, index);
    }
    auto set = build_attack_set(eval, store, pools.passages, pools.sentences, bank, grid,
                                ws.config.master_seed, ws.stops());
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
    auto attacks = materialize_all(set.instances);
    save_attacks_jsonl(attacks, out_path(ws, "attacks.jsonl"));
    std::cout << nlohmann::json{{"instances", attacks.size()},
                                {"warnings", set.warnings.size()}}
                     .dump(2)
              << "\n";
    return 0;
}

int cmd_eval(const Workspace& ws, const std::string& scorer_name,
             const std::string& attacks_path) {
    const auto& sc = require_scorer(ws, scorer_name);
    if (sc.kind == ScorerKind::judge)
        throw ConfigError("scorer \"" + scorer_name + "\" is a judge; use the judge subcommand");
    auto eval = load_eval(ws);
    auto store = load_store(ws, &eval);
    auto attacks =
        load_attacks_jsonl(attacks_path.empty() ? out_path(ws, "attacks.jsonl") : attacks_path);
    std::shared_ptr<const LexicalIndex> index;
    auto scorer = make_rank_scorer(ws, sc, store, index);
    RunOptions options;
    options.max_in_flight = sc.kind == ScorerKind::bm25 ? 8 : sc.endpoint.concurrency;
    options.remove_original = ws.config.remove_original;
    auto results = run_rank_attack(*scorer, eval, attacks, options);
    save_results_jsonl(results, out_path(ws, "results_" + scorer_name + ".jsonl"));
    write_baseline_run(ws, *scorer, eval, scorer_name);
    write_metrics(ws, scorer_name, results);
    size_t failed = 0;
    for (const auto& r : results) failed += r.failed() ? 1 : 0;
    std::cout << nlohmann::json{{"instances", results.size()}, {"failed", failed}}.dump(2)
              << "\n";
    return 0;
}

int cmd_judge(const Workspace& ws, const std::string& scorer_name,
              const std::string& attacks_path) {
    const auto& sc = require_scorer(ws, scorer_name);
    if (sc.kind != ScorerKind::judge)
        throw ConfigError("scorer \"" + scorer_name + "\" is not a judge");
    auto eval = load_eval(ws);
    auto attacks =
        load_attacks_jsonl(attacks_path.empty() ? out_path(ws, "attacks.jsonl") : attacks_path);
    JudgeScorer judge(sc.name, JudgeClient(sc.endpoint, ws.config.judge_variant));
    RunOptions options;
    options.max_in_flight = sc.endpoint.concurrency;
    auto results = run_judge_attack(judge, eval, attacks, options);
    save_results_jsonl(results, out_path(ws, "results_" + scorer_name + ".jsonl"));
    write_metrics(ws, scorer_name, results);
    size_t failed = 0;
    for (const auto& r : results) failed += r.failed() ? 1 : 0;
    std::cout << nlohmann::json{{"instances", results.size()}, {"failed", failed}}.dump(2)
              << "\n";
    return 0;
}

int cmd_seo(const Workspace& ws, const std::string& scorer_name) {
    const auto& sc = require_scorer(ws, scorer_name);
    auto eval = load_eval(ws);
    auto store = load_store(ws, &eval);
    MetricReport report;
    if (sc.kind == ScorerKind::judge) {
        JudgeScorer judge(sc.name, JudgeClient(sc.endpoint, ws.config.judge_variant));
        report = seo_scenario_judge(judge, eval, store);
    } else {
        std::shared_ptr<const LexicalIndex> index;
        auto scorer = make_rank_scorer(ws, sc, store, index);
        report = seo_scenario(*scorer, eval, store);
    }
    auto j = to_json(report);
    write_file(out_path(ws, "seo_" + scorer_name + ".json"), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_overlap(const Workspace& ws, const std::vector<std::string>& set_specs) {
    std::vector<std::pair<std::string, std::set<std::string>>> sets;
    for (const auto& spec : set_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--sets expects NAME=results.jsonl, got \"" + spec + "\"");
        std::set<std::string> ids;
        for (const auto& r : load_results_jsonl(spec.substr(eq + 1))) {
            if (!r.failed() && r.success_strict) ids.insert(r.adv_id);
        }
        sets.emplace_back(spec.substr(0, eq), std::move(ids));
    }
    auto counts = overlap_analysis(sets);
    auto csv = overlap_csv(counts);
    write_file(out_path(ws, "overlap.csv"), csv);
    std::cout << csv;
    return 0;
}

// Sentence pool for the requested source: corpus sentences for msmarco, the
// externally prepared JSONL for toxigen.
SentencePool sentence_pool_for(const Workspace& ws, SentenceSource source,
                               const BuildPoolsResult& pools) {
    if (source == SentenceSource::msmarco) return pools.sentences;
    if (ws.config.toxigen_path.empty())
        throw ConfigError("pools.toxigen_path is required for toxigen sentence injection");
    size_t dropped = 0;
    auto pool = SentencePool::load_jsonl(ws.config.toxigen_path, ws.rule, &dropped);
    if (pool.empty()) throw Error("toxigen sentence pool is empty after admissibility filter");
    return pool;
}

int cmd_defend_train(const Workspace& ws) {
    auto eval = load_eval(ws);
    auto store = load_store(ws, &eval);
    auto pools = build_pools(store, ws.rule, ws.config.master_seed, SentenceSource::msmarco,
                             ws.config.pool_limits);
    auto bank = build_word_bank(store);
    auto sentences = sentence_pool_for(ws, ws.config.defense_sentence_source, pools);
    DefenseDatasetOptions options;
    options.total_examples = ws.config.defense_examples;
    options.sentence_source = ws.config.defense_sentence_source;
    auto dataset = make_defense_dataset(eval, store, pools.passages, bank, sentences,
                                        ws.config.master_seed, options);
    std::vector<double> losses;
    auto model = train_classifier(dataset, ws.config.defense_train, &losses);
    model.save(out_path(ws, "defense_model.bin"));
    nlohmann::json j{{"examples", dataset.size()},
                     {"epoch_loss", losses},
                     {"sentence_source", std::string(to_string(ws.config.defense_sentence_source))},
                     {"threshold", ws.config.defense_train.threshold}};
    write_file(out_path(ws, "defense_train.json"), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_defend_eval(const Workspace& ws, const std::string& model_path) {
    auto eval = load_eval(ws);
    auto store = load_store(ws, &eval);
    auto model =
        LinearModel::load(model_path.empty() ? out_path(ws, "defense_model.bin") : model_path);
    auto pools = build_pools(store, ws.rule, ws.config.master_seed, SentenceSource::msmarco,
                             ws.config.pool_limits);
    auto bank = build_word_bank(store);

    DefenseEvalInputs inputs;
    {
        const std::string corpus_name =
            ws.config.source_tag.empty() ? std::string(to_string(ws.config.corpus_format))
                                         : ws.config.source_tag;
        Rng rng = stream(ws.config.master_seed, "defense/eval/benign");
        const size_t want = std::min<size_t>(ws.config.defense_eval_benign, store.size());
        auto picks = rng.sample_indices(store.size(), want);
        std::sort(picks.begin(), picks.end());
        for (auto i : picks) inputs.benign_by_corpus[corpus_name].push_back(store[i].text);
    }

    // full configuration grid, equally represented
    GridConfig grid;
    grid.positions = {Position::start, Position::middle, Position::end};
    grid.reps = {1, 2, 3};
    grid.samples_per_query = ws.config.defense_eval_samples_per_query;

    auto add_attacks = [&](const std::string& type, std::vector<PayloadKind> kinds,
                           const SentencePool& sentences,
                           const std::map<std::string, std::vector<RelevantBase>>& bases) {
        GridConfig g = grid;
        g.injection_kinds = std::move(kinds);
        g.relevant_bases = bases;
        auto set = build_attack_set(eval, store, pools.passages, sentences, bank, g,
                                    ws.config.master_seed, ws.stops());
        for (const auto& m : materialize_all(set.instances)) {
            std::string key{to_string(m.adv.provenance.spec.payload_kind)};
            key += "/";
            key += to_string(m.base_kind);
            key += "/";
            key += to_string(m.adv.provenance.spec.position);
            key += "/x" + std::to_string(m.adv.provenance.spec.reps);
            inputs.attacks_by_type[type].push_back({key, m.adv.text});
        }
    };

    add_attacks("query", {PayloadKind::query}, pools.sentences, {});
    add_attacks("keyword", {PayloadKind::keywords}, pools.sentences, {});

    // sentence-injection bases: the configured retriever's top passages
    // (native BM25 at desk scale, recorded in the manifest)
    auto index = build_index(ws, store);
    auto bases = relevant_bases(ws, store, eval, index);
    add_attacks("sentence-msmarco", {PayloadKind::sentence}, pools.sentences, bases);
    if (!ws.config.toxigen_path.empty()) {
        auto toxigen = sentence_pool_for(ws, SentenceSource::toxigen, pools);
        add_attacks("sentence-toxigen", {PayloadKind::sentence}, toxigen, bases);
    }

    auto report = eval_defense(model, inputs);
    write_file(out_path(ws, "defense_report.json"), to_json(report).dump(2) + "\n");
    auto rendered = render_defense_report(report, ws.meta);
    write_file(out_path(ws, "defense_report.csv"), rendered.csv);
    write_file(out_path(ws, "defense_report.md"), rendered.markdown);
    std::cout << to_json(report).dump(2) << "\n";
    return 0;
}

int cmd_report(const Workspace& ws, const std::string& layout_name,
               const std::vector<std::string>& result_specs) {
    const auto layout = report_layout_from(layout_name);
    RenderedReport rendered;
    if (layout == ReportLayout::defense) {
        if (result_specs.size() != 1 || result_specs[0].find('=') != std::string::npos)
            throw ConfigError("--results for the defense layout: one defense_report.json path");
        auto j = nlohmann::json::parse(read_file(result_specs[0]));
        rendered = render_defense_report(defense_report_from_json(j), ws.meta);
    } else {
        if (result_specs.empty())
            throw ConfigError("--results NAME=results.jsonl is required (repeatable)");
        std::map<std::string, std::vector<MetricReport>> by_scorer;
        for (const auto& spec : result_specs) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--results expects NAME=results.jsonl, got \"" + spec + "\"");
            auto results = load_results_jsonl(spec.substr(eq + 1));
            by_scorer[spec.substr(0, eq)] =
                compute_metrics(results, {"payload", "base", "position", "reps"});
        }
        rendered = render_rank_report(layout, by_scorer, ws.meta);
    }
    write_file(out_path(ws, "report_" + layout_name + ".csv"), rendered.csv);
    write_file(out_path(ws, "report_" + layout_name + ".md"), rendered.markdown);
    std::cout << rendered.markdown;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"content-injection attacks against retrievers, rerankers and LLM judges"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string scorer_name, attacks_path, model_path, layout;
    std::vector<std::string> set_specs, result_specs;

    auto* ingest = app.add_subcommand("ingest", "load corpus, queries and qrels; report counts");
    add_common(ingest, args);
    auto* stats = app.add_subcommand("stats", "corpus statistics (words/sentences per passage)");
    add_common(stats, args);
    auto* pool = app.add_subcommand("pool", "build passage and sentence pools");
    add_common(pool, args);
    auto* attack = app.add_subcommand("attack", "build and materialize the attack set");
    add_common(attack, args);
    auto* eval = app.add_subcommand("eval", "run a retriever/reranker over the attack set");
    add_common(eval, args);
    eval->add_option("--scorer", scorer_name, "scorer name from config")->required();
    eval->add_option("--attacks", attacks_path, "attack pool JSONL (default: <out>/attacks.jsonl)");
    auto* judge = app.add_subcommand("judge", "run an LLM judge over the attack set");
    add_common(judge, args);
    judge->add_option("--scorer", scorer_name, "judge name from config")->required();
    judge->add_option("--attacks", attacks_path, "attack pool JSONL (default: <out>/attacks.jsonl)");
    auto* seo = app.add_subcommand("seo", "promotion scenario for suboptimally scoring passages");
    add_common(seo, args);
    seo->add_option("--scorer", scorer_name, "scorer name from config")->required();
    auto* overlap = app.add_subcommand("overlap", "success-set overlap across 2-3 scorers");
    add_common(overlap, args);
    overlap->add_option("--sets", set_specs, "NAME=results.jsonl (2 or 3 times)")->required();
    auto* defend_train = app.add_subcommand("defend-train", "train the injection detector");
    add_common(defend_train, args);
    auto* defend_eval = app.add_subcommand("defend-eval", "evaluate the injection detector");
    add_common(defend_eval, args);
    defend_eval->add_option("--model", model_path, "model file (default: <out>/defense_model.bin)");
    auto* report = app.add_subcommand("report", "render result tables");
    add_common(report, args);
    report->add_option("--layout", layout, "repetition | location | generated | defense")
        ->required();
    report->add_option("--results", result_specs,
                       "NAME=results.jsonl (rank layouts) or defense_report.json");

    CLI11_PARSE(app, argc, argv);

    try {
        auto* cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();
        Workspace ws = open_workspace(args, name);
        if (cmd == ingest) return cmd_ingest(ws);
        if (cmd == stats) return cmd_stats(ws);
        if (cmd == pool) return cmd_pool(ws);
        if (cmd == attack) return cmd_attack(ws);
        if (cmd == eval) return cmd_eval(ws, scorer_name, attacks_path);
        if (cmd == judge) return cmd_judge(ws, scorer_name, attacks_path);
        if (cmd == seo) return cmd_seo(ws, scorer_name);
        if (cmd == overlap) return cmd_overlap(ws, set_specs);
        if (cmd == defend_train) return cmd_defend_train(ws);
        if (cmd == defend_eval) return cmd_defend_eval(ws, model_path);
        if (cmd == report) return cmd_report(ws, layout, result_specs);
        std::cerr << "error: unhandled subcommand " << name << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
