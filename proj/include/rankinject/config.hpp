#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankinject/attackgen.hpp"
#include "rankinject/common.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/defense.hpp"
#include "rankinject/http.hpp"
#include "rankinject/prompts.hpp"
#include "rankinject/scoring.hpp"
#include "rankinject/textkit.hpp"

// Run configuration: one flat JSON document, overridable from the command line
// with --set key=value (dotted paths). Validation is total: every violation in
// the document is reported in a single pass.

namespace rankinject {

enum class ScorerKind { bm25, embedding, reranker, judge };

inline std::string_view to_string(ScorerKind k) {
    switch (k) {
        case ScorerKind::bm25: return "bm25";
        case ScorerKind::embedding: return "embedding";
        case ScorerKind::reranker: return "reranker";
        default: return "judge";
    }
}

inline ScorerKind scorer_kind_from(std::string_view s) {
    if (s == "bm25") return ScorerKind::bm25;
    if (s == "embedding") return ScorerKind::embedding;
    if (s == "reranker") return ScorerKind::reranker;
    if (s == "judge") return ScorerKind::judge;
    throw ParseError("unknown scorer kind: " + std::string(s));
}

struct ScorerConfig {
    std::string name;
    ScorerKind kind = ScorerKind::bm25;
    EndpointConfig endpoint;  // ignored for bm25
};

struct RunConfig {
    uint64_t master_seed = 0;
    std::string output_dir = "out";

    std::string corpus_path;
    CorpusFormat corpus_format = CorpusFormat::beir_jsonl;
    bool include_titles = true;
    std::string source_tag;
    std::string queries_path;
    std::string qrels_path;
    int min_relevant_grade = 1;

    PoolLimits pool_limits;
    int admissibility_min_chars = 30;
    int admissibility_max_chars = 300;
    int admissibility_min_words = 5;
    std::string stopwords_path;  // empty = bundled list
    std::string verbs_path;
    std::string nouns_path;
    std::string toxigen_path;  // externally prepared sentence pool (JSONL)

    std::vector<PayloadKind> injection_kinds{PayloadKind::query};
    std::vector<BaseKind> base_kinds{BaseKind::random, BaseKind::scrambled};
    std::vector<Position> positions{Position::start};
    std::vector<int> reps{1};
    int samples_per_query = 5;
    bool scatter = false;
    std::string relevant_source = "bm25-top1";  // bm25-top1 | qrels | generated
    bool remove_original = false;

    Bm25Params bm25;
    std::vector<ScorerConfig> scorers;
    JudgeVariant judge_variant = JudgeVariant::standard;

    EndpointConfig generation;
    bool generation_configured = false;
    std::vector<int> generation_targets{50, 100, 200};

    size_t corpus_subsample = 0;  // 0 = whole corpus
    bool force_include_qrels = true;

    size_t defense_examples = 4000;
    TrainConfig defense_train;
    SentenceSource defense_sentence_source = SentenceSource::msmarco;
    size_t defense_eval_benign = 500;
    int defense_eval_samples_per_query = 2;

    nlohmann::json raw;  // post-override document, hashed into run metadata

    const ScorerConfig* find_scorer(std::string_view name) const {
        for (const auto& s : scorers)
            if (s.name == name) return &s;
        return nullptr;
    }
};

// Hash of the effective configuration. output_dir is excluded: it says where
// results land, not what the run computes, and reports from runs that differ
// only in destination must compare byte-identical.
inline std::string config_hash(const nlohmann::json& j) {
    auto canonical = j;
    canonical.erase("output_dir");
    return to_hex(fnv1a64(canonical.dump()));
}

namespace detail {

inline void parse_endpoint(const nlohmann::json& j, EndpointConfig& out,
                           const std::string& where, std::vector<std::string>& violations) {
    out.base_url = j.value("endpoint", std::string());
    out.model = j.value("model", std::string());
    out.api_key_env = j.value("api_key_env", std::string());
    out.retries = j.value("retries", 3);
    out.timeout_s = j.value("timeout_s", 60.0);
    out.backoff_s = j.value("backoff_s", 0.5);
    out.concurrency = j.value("concurrency", 8);
    if (!out.base_url.starts_with("http://") && !out.base_url.starts_with("https://"))
        violations.push_back(where + ": endpoint URL must start with http:// or https://, got \"" +
                             out.base_url + "\"");
    if (out.retries < 1) violations.push_back(where + ": retries must be >= 1");
    if (out.concurrency < 1) violations.push_back(where + ": concurrency must be >= 1");
    if (out.timeout_s <= 0) violations.push_back(where + ": timeout_s must be positive");
}

}  // namespace detail

/// Parses and validates in one pass; throws ConfigError carrying every
/// violation found.
inline RunConfig parse_config(const nlohmann::json& j) {
    std::vector<std::string> violations;
    RunConfig config;
    config.raw = j;

    if (!j.contains("master_seed") || !j["master_seed"].is_number_integer())
        violations.push_back("master_seed: required integer (no implicit randomness)");
    else
        config.master_seed = j["master_seed"].get<uint64_t>();

    config.output_dir = j.value("output_dir", std::string("out"));

    if (j.contains("corpus")) {
        const auto& c = j["corpus"];
        config.corpus_path = c.value("path", std::string());
        try {
            config.corpus_format = corpus_format_from(c.value("format", "beir-jsonl"));
        } catch (const ParseError& e) {
            violations.push_back(std::string("corpus.format: ") + e.what());
        }
        config.include_titles = c.value("include_titles", true);
        config.source_tag = c.value("source_tag", std::string());
    }
    config.queries_path = j.value("queries", std::string());
    config.qrels_path = j.value("qrels", std::string());
    config.min_relevant_grade = j.value("min_relevant_grade", 1);
    if (config.min_relevant_grade < 0 || config.min_relevant_grade > 3)
        violations.push_back("min_relevant_grade: must be within 0-3");

    if (j.contains("pools")) {
        const auto& p = j["pools"];
        config.pool_limits.max_passages = p.value("max_passages", 0ul);
        config.pool_limits.max_sentences = p.value("max_sentences", 0ul);
        config.admissibility_min_chars = p.value("min_chars", 30);
        config.admissibility_max_chars = p.value("max_chars", 300);
        config.admissibility_min_words = p.value("min_words", 5);
        config.stopwords_path = p.value("stopwords_path", std::string());
        config.verbs_path = p.value("verbs_path", std::string());
        config.nouns_path = p.value("nouns_path", std::string());
        config.toxigen_path = p.value("toxigen_path", std::string());
        if (config.admissibility_min_chars >= config.admissibility_max_chars)
            violations.push_back("pools: min_chars must be < max_chars");
        if (config.admissibility_min_words < 1)
            violations.push_back("pools: min_words must be >= 1");
    }

    if (j.contains("attack")) {
        const auto& a = j["attack"];
        if (a.contains("injection_kinds")) {
            config.injection_kinds.clear();
            for (const auto& k : a["injection_kinds"]) {
                try {
                    config.injection_kinds.push_back(payload_kind_from(k.get<std::string>()));
                } catch (const std::exception& e) {
                    violations.push_back(std::string("attack.injection_kinds: ") + e.what());
                }
            }
            if (config.injection_kinds.empty())
                violations.push_back("attack.injection_kinds: must not be empty");
        }
        if (a.contains("base_kinds")) {
            config.base_kinds.clear();
            for (const auto& k : a["base_kinds"]) {
                try {
                    config.base_kinds.push_back(base_kind_from(k.get<std::string>()));
                } catch (const std::exception& e) {
                    violations.push_back(std::string("attack.base_kinds: ") + e.what());
                }
            }
        }
        if (a.contains("positions")) {
            config.positions.clear();
            for (const auto& p : a["positions"]) {
                try {
                    config.positions.push_back(position_from(p.get<std::string>()));
                } catch (const std::exception& e) {
                    violations.push_back(std::string("attack.positions: ") + e.what());
                }
            }
            if (config.positions.empty())
                violations.push_back("attack.positions: must not be empty");
        }
        if (a.contains("reps")) {
            config.reps.clear();
            for (const auto& r : a["reps"]) {
                if (!r.is_number_integer()) {
                    violations.push_back("attack.reps: entries must be integers");
                    continue;
                }
                const int reps = r.get<int>();
                if (reps < 1 || reps > 3)
                    violations.push_back("attack.reps: must be between 1 and 3, got " +
                                         std::to_string(reps));
                else
                    config.reps.push_back(reps);
            }
            if (config.reps.empty())
                violations.push_back("attack.reps: must contain at least one value in 1-3");
        }
        config.samples_per_query = a.value("samples_per_query", 5);
        if (config.samples_per_query < 1)
            violations.push_back("attack.samples_per_query: must be >= 1");
        config.scatter = a.value("scatter", false);
        config.relevant_source = a.value("relevant_source", std::string("bm25-top1"));
        if (config.relevant_source != "bm25-top1" && config.relevant_source != "qrels" &&
            config.relevant_source != "generated")
            violations.push_back("attack.relevant_source: must be bm25-top1, qrels or generated");
        config.remove_original = a.value("remove_original", false);
    }

    if (j.contains("bm25")) {
        config.bm25.k1 = j["bm25"].value("k1", 0.9);
        config.bm25.b = j["bm25"].value("b", 0.4);
        try {
            config.bm25.validate();
        } catch (const ConfigError& e) {
            violations.push_back(std::string("bm25: ") + e.what());
        }
    }

    if (j.contains("scorers")) {
        std::set<std::string> names;
        size_t idx = 0;
        for (const auto& s : j["scorers"]) {
            ScorerConfig sc;
            const std::string where = "scorers[" + std::to_string(idx++) + "]";
            sc.name = s.value("name", std::string());
            if (sc.name.empty()) violations.push_back(where + ": name is required");
            if (!names.insert(sc.name).second)
                violations.push_back(where + ": duplicate scorer name \"" + sc.name + "\"");
            try {
                sc.kind = scorer_kind_from(s.value("kind", std::string()));
            } catch (const ParseError& e) {
                violations.push_back(where + ": " + e.what());
            }
            if (sc.kind != ScorerKind::bm25)
                detail::parse_endpoint(s, sc.endpoint, where, violations);
            config.scorers.push_back(std::move(sc));
        }
    }

    const std::string variant = j.value("judge_variant", std::string("default"));
    if (variant == "default")
        config.judge_variant = JudgeVariant::standard;
    else if (variant == "defensive")
        config.judge_variant = JudgeVariant::defensive;
    else
        violations.push_back("judge_variant: must be \"default\" or \"defensive\"");

    if (j.contains("generation") && j["generation"].is_object() &&
        !j["generation"].value("endpoint", std::string()).empty()) {
        config.generation_configured = true;
        detail::parse_endpoint(j["generation"], config.generation, "generation", violations);
        if (j["generation"].contains("target_words")) {
            config.generation_targets.clear();
            for (const auto& t : j["generation"]["target_words"]) {
                const int words = t.is_number_integer() ? t.get<int>() : -1;
                if (words <= 0)
                    violations.push_back("generation.target_words: must be positive integers");
                else
                    config.generation_targets.push_back(words);
            }
        }
    }

    if (j.contains("desk_scale")) {
        config.corpus_subsample = j["desk_scale"].value("corpus_subsample", 0ul);
        config.force_include_qrels = j["desk_scale"].value("force_include_qrels", true);
    }

    if (j.contains("defense")) {
        const auto& d = j["defense"];
        config.defense_examples = d.value("examples", 4000ul);
        config.defense_train.epochs = d.value("epochs", 8);
        config.defense_train.learning_rate = d.value("learning_rate", 0.5);
        config.defense_train.l2 = d.value("l2", 1e-7);
        config.defense_train.threshold = d.value("threshold", 0.5);
        if (config.defense_train.epochs < 1) violations.push_back("defense.epochs: must be >= 1");
        if (config.defense_train.threshold <= 0 || config.defense_train.threshold >= 1)
            violations.push_back("defense.threshold: must lie strictly between 0 and 1");
        try {
            config.defense_sentence_source =
                sentence_source_from(d.value("sentence_source", "msmarco"));
        } catch (const ParseError& e) {
            violations.push_back(std::string("defense.sentence_source: ") + e.what());
        }
        config.defense_eval_benign = d.value("eval_benign_per_corpus", 500ul);
        config.defense_eval_samples_per_query = d.value("eval_samples_per_query", 2);
        if (d.value("include_query", false))
            violations.push_back(
                "defense.include_query: passage+query classification is recorded as an option "
                "but not implemented; only false is accepted");
    }
    config.defense_train.seed = config.master_seed;

    if (!violations.empty())
        throw ConfigError("invalid config (" + std::to_string(violations.size()) +
                              " violation(s)):\n  - " + join(violations, "\n  - "),
                          violations);
    return config;
}

inline nlohmann::json load_config_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + path + ": " + e.what());
    }
}

/// Applies one `--set key=value` override. Keys are dotted paths; numeric
/// segments index arrays. Values parse as JSON when possible, else as strings.
inline void apply_override(nlohmann::json& j, const std::string& key, const std::string& value) {
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
        parsed = value;
    }
    nlohmann::json* node = &j;
    const auto parts = split(key, '.');
    for (size_t i = 0; i < parts.size(); ++i) {
        const bool last = i + 1 == parts.size();
        const auto& part = parts[i];
        const bool numeric =
            !part.empty() && std::all_of(part.begin(), part.end(),
                                         [](char c) { return c >= '0' && c <= '9'; });
        if (numeric && node->is_array()) {
            const size_t idx = static_cast<size_t>(std::stoul(part));
            if (idx >= node->size())
                throw ConfigError("--set " + key + ": array index out of range");
            if (last)
                (*node)[idx] = parsed;
            else
                node = &(*node)[idx];
        } else {
            if (last)
                (*node)[part] = parsed;
            else
                node = &(*node)[part];
        }
    }
}

}  // namespace rankinject
