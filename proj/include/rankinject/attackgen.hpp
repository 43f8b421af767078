#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rankinject/common.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/prompts.hpp"
#include "rankinject/rng.hpp"
#include "rankinject/textkit.hpp"

// Adversarial passage construction. Every injection records the character
// spans of inserted material, and deleting those spans reconstructs the base
// passage byte-exactly.

namespace rankinject {

enum class PayloadKind { query, keywords, sentence };
enum class Position { start, middle, end };
enum class BaseKind { random, scrambled, relevant, generated };

inline std::string_view to_string(PayloadKind k) {
    switch (k) {
        case PayloadKind::query: return "query";
        case PayloadKind::keywords: return "keywords";
        default: return "sentence";
    }
}

inline PayloadKind payload_kind_from(std::string_view s) {
    if (s == "query") return PayloadKind::query;
    if (s == "keywords") return PayloadKind::keywords;
    if (s == "sentence") return PayloadKind::sentence;
    throw ParseError("unknown payload kind: " + std::string(s));
}

inline std::string_view to_string(Position p) {
    switch (p) {
        case Position::start: return "start";
        case Position::middle: return "middle";
        default: return "end";
    }
}

inline Position position_from(std::string_view s) {
    if (s == "start") return Position::start;
    if (s == "middle") return Position::middle;
    if (s == "end") return Position::end;
    throw ParseError("unknown position: " + std::string(s));
}

inline std::string_view to_string(BaseKind k) {
    switch (k) {
        case BaseKind::random: return "random";
        case BaseKind::scrambled: return "scrambled";
        case BaseKind::relevant: return "relevant";
        default: return "generated";
    }
}

inline BaseKind base_kind_from(std::string_view s) {
    if (s == "random") return BaseKind::random;
    if (s == "scrambled") return BaseKind::scrambled;
    if (s == "relevant") return BaseKind::relevant;
    if (s == "generated") return BaseKind::generated;
    throw ParseError("unknown base kind: " + std::string(s));
}

/// How a payload is inserted: where, how many copies, and whether the copies
/// form one contiguous block (default) or are scattered over independent gaps.
struct InjectionSpec {
    PayloadKind payload_kind = PayloadKind::query;
    Position position = Position::start;
    int reps = 1;  // 1..3
    bool scatter = false;

    void validate() const {
        if (reps < 1 || reps > 3)
            throw ConfigError("InjectionSpec: reps must be between 1 and 3, got " +
                              std::to_string(reps));
    }
};

struct Provenance {
    std::string base_id;
    InjectionSpec spec;
    std::string payload;
    // Byte spans of inserted material in the adversarial text, ascending and
    // non-overlapping. Deleting them reproduces the base text exactly.
    std::vector<std::pair<size_t, size_t>> insertion_offsets;
};

struct AdversarialPassage {
    std::string id;
    std::string text;
    Provenance provenance;
};

/// Reconstructs the base text by deleting the recorded spans.
inline std::string strip_injections(const AdversarialPassage& adv) {
    std::string base;
    size_t pos = 0;
    for (const auto& [b, e] : adv.provenance.insertion_offsets) {
        base += adv.text.substr(pos, b - pos);
        pos = e;
    }
    base += adv.text.substr(pos);
    return base;
}

namespace detail {

// Byte offsets where whitespace-separated chunks of `base` begin.
inline std::vector<size_t> chunk_starts(std::string_view base) {
    std::vector<size_t> starts;
    bool in_chunk = false;
    for (size_t i = 0; i < base.size(); ++i) {
        const bool space = is_ascii_space(base[i]);
        if (!space && !in_chunk) starts.push_back(i);
        in_chunk = !space;
    }
    return starts;
}

}  // namespace detail

/// Inserts `payload` into `base_text` per the spec. Block mode inserts one
/// space-joined block of `reps` copies; scatter mode inserts each copy at an
/// independently drawn point. Middle positions pick uniformly among interior
/// inter-token gaps and are the only consumers of `rng`.
inline AdversarialPassage inject(std::string_view base_text, std::string_view payload,
                                 const InjectionSpec& spec, Rng& rng, std::string_view base_id = "",
                                 std::string_view adv_id = "") {
    spec.validate();
    if (payload.empty()) throw Error("inject: empty payload");
    const auto chunks = detail::chunk_starts(base_text);
    if (spec.position == Position::middle && chunks.size() < 2)
        throw Error("inject: middle position needs a base with at least 2 tokens");

    auto draw_point = [&]() -> size_t {
        switch (spec.position) {
            case Position::start: return 0;
            case Position::end: return base_text.size();
            default:
                // interior gap g sits just before chunk g+1
                return chunks[static_cast<size_t>(rng.bounded(chunks.size() - 1)) + 1];
        }
    };

    // (insertion point, inserted string); block mode bundles all copies in one
    std::vector<std::pair<size_t, std::string>> inserts;
    if (spec.scatter) {
        for (int r = 0; r < spec.reps; ++r) inserts.emplace_back(draw_point(), std::string(payload));
    } else {
        std::string block;
        for (int r = 0; r < spec.reps; ++r) {
            if (r) block += ' ';
            block += payload;
        }
        inserts.emplace_back(draw_point(), std::move(block));
    }
    std::stable_sort(inserts.begin(), inserts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    AdversarialPassage adv;
    adv.provenance.base_id = std::string(base_id);
    adv.provenance.spec = spec;
    adv.provenance.payload = std::string(payload);
    size_t prev = 0;
    for (auto& [point, text] : inserts) {
        adv.text.append(base_text.substr(prev, point - prev));
        const size_t span_begin = adv.text.size();
        if (point == base_text.size()) {
            adv.text += ' ';
            adv.text += text;
        } else {
            adv.text += text;
            adv.text += ' ';
        }
        adv.provenance.insertion_offsets.emplace_back(span_begin, adv.text.size());
        prev = point;
    }
    adv.text.append(base_text.substr(prev));
    adv.id = adv_id.empty() ? "adv-" + to_hex(fnv1a64(adv.text, fnv1a64(payload)))
                            : std::string(adv_id);
    return adv;
}

inline AdversarialPassage make_query_injection(const Query& query, std::string_view base_text,
                                               InjectionSpec spec, Rng& rng,
                                               std::string_view base_id = "",
                                               std::string_view adv_id = "") {
    spec.payload_kind = PayloadKind::query;
    return inject(base_text, query.text, spec, rng, base_id, adv_id);
}

inline AdversarialPassage make_keyword_injection(const Query& query, std::string_view base_text,
                                                 InjectionSpec spec, Rng& rng,
                                                 const StopwordList& stopwords = bundled_stopwords(),
                                                 std::string_view base_id = "",
                                                 std::string_view adv_id = "") {
    spec.payload_kind = PayloadKind::keywords;
    const auto keywords = extract_keywords(query.text, stopwords);
    return inject(base_text, join(keywords, " "), spec, rng, base_id, adv_id);
}

inline AdversarialPassage make_sentence_injection(std::string_view sentence,
                                                  std::string_view relevant_passage_text,
                                                  InjectionSpec spec, Rng& rng,
                                                  std::string_view base_id = "",
                                                  std::string_view adv_id = "") {
    spec.payload_kind = PayloadKind::sentence;
    return inject(relevant_passage_text, sentence, spec, rng, base_id, adv_id);
}

/// One cell of the experiment grid before materialization.
struct AttackInstance {
    std::string query_id;
    BaseKind base_kind = BaseKind::random;
    std::string base_id;
    std::string base_text;
    std::string payload_text;
    InjectionSpec spec;
    int sample_index = 0;  // 0..samples_per_query-1
    uint64_t rng_stream_id = 0;
    std::optional<int> gen_target_words;  // set when base_kind == generated
};

inline std::string attack_instance_id(const AttackInstance& inst) {
    std::string base_tag{to_string(inst.base_kind)};
    if (inst.gen_target_words) base_tag = "gen" + std::to_string(*inst.gen_target_words);
    std::string id = "adv-";
    id += inst.query_id;
    id += '-';
    id += to_string(inst.spec.payload_kind);
    id += '-';
    id += base_tag;
    id += '-';
    id += to_string(inst.spec.position);
    id += "-x";
    id += std::to_string(inst.spec.reps);
    id += "-s";
    id += std::to_string(inst.sample_index);
    return id;
}

/// An instance together with its constructed adversarial passage.
struct MaterializedAttack {
    AdversarialPassage adv;
    std::string query_id;
    BaseKind base_kind = BaseKind::random;
    int sample_index = 0;
    std::optional<int> gen_target_words;
};

/// Deterministic: uses only the instance's own RNG stream, so materialization
/// order never matters.
inline MaterializedAttack materialize(const AttackInstance& inst) {
    Rng rng(inst.rng_stream_id);
    MaterializedAttack m;
    m.adv = inject(inst.base_text, inst.payload_text, inst.spec, rng, inst.base_id,
                   attack_instance_id(inst));
    m.query_id = inst.query_id;
    m.base_kind = inst.base_kind;
    m.sample_index = inst.sample_index;
    m.gen_target_words = inst.gen_target_words;
    return m;
}

/// Sentence-injection base for a query: the scorer's top passage, a qrels
/// passage, or a generated passage (then `target_words` is set).
struct RelevantBase {
    std::string id;
    std::string text;
    std::optional<int> target_words;
};

struct GridConfig {
    std::vector<PayloadKind> injection_kinds{PayloadKind::query};
    std::vector<BaseKind> base_kinds{BaseKind::random, BaseKind::scrambled};
    std::vector<Position> positions{Position::start};
    std::vector<int> reps{1};
    int samples_per_query = 5;
    bool scatter = false;
    std::map<std::string, std::vector<RelevantBase>> relevant_bases;

    void validate() const {
        if (injection_kinds.empty()) throw ConfigError("GridConfig: no injection kinds");
        if (positions.empty()) throw ConfigError("GridConfig: no positions");
        if (reps.empty()) throw ConfigError("GridConfig: no repetition counts");
        for (int r : reps)
            if (r < 1 || r > 3)
                throw ConfigError("GridConfig: reps must be between 1 and 3, got " +
                                  std::to_string(r));
        if (samples_per_query < 1) throw ConfigError("GridConfig: samples_per_query must be >= 1");
    }
};

struct AttackSet {
    std::vector<AttackInstance> instances;
    std::vector<std::string> warnings;
};

/// Enumerates the full grid. Per query, query/keyword injection reuses the
/// same `samples_per_query` random bases and their word-count-paired scrambled
/// bases across every (position, reps) cell, and sentence injection draws
/// `samples_per_query` sentences per relevant base. All draws come from
/// streams keyed by (seed, purpose, query, sample), so the result is
/// independent of evaluation order and byte-identical across runs.
inline AttackSet build_attack_set(const EvalSet& eval, const PassageStore& store,
                                  const PassagePool& passage_pool,
                                  const SentencePool& sentence_pool,
                                  const std::vector<std::string>& word_bank,
                                  const GridConfig& grid, uint64_t master_seed,
                                  const StopwordList& stopwords = bundled_stopwords()) {
    grid.validate();
    bool wants_bases = false, wants_sentences = false;
    for (auto k : grid.injection_kinds) {
        (k == PayloadKind::sentence ? wants_sentences : wants_bases) = true;
    }
    if (wants_bases && passage_pool.empty())
        throw Error("build_attack_set: passage pool is empty");
    if (wants_bases && word_bank.empty())
        throw Error("build_attack_set: word bank is empty");
    if (wants_sentences && sentence_pool.empty())
        throw Error("build_attack_set: sentence pool is empty");

    AttackSet out;
    for (const auto& query : eval.queries) {
        // shared per-query bases, one pair (random, scrambled) per sample index
        std::vector<const Passage*> random_bases;
        std::vector<std::string> scrambled_bases;
        if (wants_bases) {
            for (int i = 0; i < grid.samples_per_query; ++i) {
                auto pick = stream(master_seed,
                                   "attack/base/random/" + query.id + "/" + std::to_string(i));
                const auto& id =
                    passage_pool.passage_ids[static_cast<size_t>(pick.bounded(passage_pool.size()))];
                const Passage* p = store.find(id);
                if (!p) throw Error("build_attack_set: pool id not in store: " + id);
                random_bases.push_back(p);
                auto scramble = stream(master_seed, "attack/base/scrambled/" + query.id + "/" +
                                                        std::to_string(i));
                scrambled_bases.push_back(
                    make_scrambled_passage(word_bank, tokenize(p->text).size(), scramble));
            }
        }
        std::optional<std::string> keyword_payload;

        for (auto kind : grid.injection_kinds) {
            if (kind != PayloadKind::sentence) {
                std::string payload;
                if (kind == PayloadKind::query) {
                    payload = query.text;
                } else {
                    if (!keyword_payload) {
                        try {
                            keyword_payload = join(extract_keywords(query.text, stopwords), " ");
                        } catch (const Error&) {
                            out.warnings.push_back("query " + query.id +
                                                   " has no keywords after stopword removal; "
                                                   "keyword instances skipped");
                            keyword_payload = std::string();
                        }
                    }
                    if (keyword_payload->empty()) continue;
                    payload = *keyword_payload;
                }
                for (auto base_kind : grid.base_kinds) {
                    if (base_kind != BaseKind::random && base_kind != BaseKind::scrambled) continue;
                    for (int i = 0; i < grid.samples_per_query; ++i) {
                        AttackInstance inst;
                        inst.query_id = query.id;
                        inst.base_kind = base_kind;
                        if (base_kind == BaseKind::random) {
                            inst.base_id = random_bases[static_cast<size_t>(i)]->id;
                            inst.base_text = random_bases[static_cast<size_t>(i)]->text;
                        } else {
                            inst.base_id = "scrambled-" + query.id + "-" + std::to_string(i);
                            inst.base_text = scrambled_bases[static_cast<size_t>(i)];
                        }
                        inst.payload_text = payload;
                        inst.sample_index = i;
                        for (auto pos : grid.positions) {
                            for (int r : grid.reps) {
                                AttackInstance cell = inst;
                                cell.spec = InjectionSpec{kind, pos, r, grid.scatter};
                                cell.rng_stream_id =
                                    stream_id(master_seed, "attack/inject/" +
                                                               attack_instance_id(cell));
                                out.instances.push_back(std::move(cell));
                            }
                        }
                    }
                }
            } else {
                auto it = grid.relevant_bases.find(query.id);
                if (it == grid.relevant_bases.end() || it->second.empty()) {
                    out.warnings.push_back("query " + query.id +
                                           " has no relevant passage; sentence instances skipped");
                    continue;
                }
                for (const auto& rb : it->second) {
                    for (int i = 0; i < grid.samples_per_query; ++i) {
                        auto pick = stream(master_seed, "attack/sentence/" + query.id + "/" +
                                                            rb.id + "/" + std::to_string(i));
                        const auto& sentence = pick.pick(sentence_pool.sentences());
                        AttackInstance inst;
                        inst.query_id = query.id;
                        inst.base_kind =
                            rb.target_words ? BaseKind::generated : BaseKind::relevant;
                        inst.base_id = rb.id;
                        inst.base_text = rb.text;
                        inst.payload_text = sentence;
                        inst.sample_index = i;
                        inst.gen_target_words = rb.target_words;
                        for (auto pos : grid.positions) {
                            for (int r : grid.reps) {
                                AttackInstance cell = inst;
                                cell.spec = InjectionSpec{kind, pos, r, grid.scatter};
                                cell.rng_stream_id =
                                    stream_id(master_seed, "attack/inject/" +
                                                               attack_instance_id(cell));
                                out.instances.push_back(std::move(cell));
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// LLM-generated relevant passage for a query.
struct GeneratedPassage {
    std::string query_id;
    int target_words = 0;
    std::string text;
    size_t word_count = 0;
    bool off_target = false;  // both attempts deviated more than 25%
};

/// `complete` maps a prompt to generated text (one remote call). A single
/// regeneration is attempted when the word count misses the target by more
/// than 25%; a second miss keeps the text and flags it.
template <typename CompleteFn>
GeneratedPassage generate_relevant_passage(CompleteFn&& complete, const Query& query,
                                           int target_words) {
    if (target_words <= 0) throw Error("generate_relevant_passage: target_words must be positive");
    const auto prompt = generation_prompt(target_words, query.text);
    auto on_target = [&](size_t wc) {
        return std::abs(static_cast<double>(wc) - target_words) <= 0.25 * target_words;
    };
    GeneratedPassage g;
    g.query_id = query.id;
    g.target_words = target_words;
    g.text = complete(prompt);
    g.word_count = tokenize(g.text).size();
    if (!on_target(g.word_count)) {
        g.text = complete(prompt);
        g.word_count = tokenize(g.text).size();
        g.off_target = !on_target(g.word_count);
    }
    return g;
}

inline nlohmann::json to_json(const MaterializedAttack& m) {
    nlohmann::json offsets = nlohmann::json::array();
    for (const auto& [b, e] : m.adv.provenance.insertion_offsets)
        offsets.push_back(nlohmann::json::array({b, e}));
    nlohmann::json j{{"id", m.adv.id},
                     {"text", m.adv.text},
                     {"query_id", m.query_id},
                     {"base_id", m.adv.provenance.base_id},
                     {"base_kind", to_string(m.base_kind)},
                     {"payload_kind", to_string(m.adv.provenance.spec.payload_kind)},
                     {"payload", m.adv.provenance.payload},
                     {"position", to_string(m.adv.provenance.spec.position)},
                     {"reps", m.adv.provenance.spec.reps},
                     {"scatter", m.adv.provenance.spec.scatter},
                     {"sample_index", m.sample_index},
                     {"insertion_offsets", offsets}};
    if (m.gen_target_words) j["gen_target_words"] = *m.gen_target_words;
    return j;
}

inline MaterializedAttack materialized_attack_from_json(const nlohmann::json& j) {
    MaterializedAttack m;
    m.adv.id = j.at("id").get<std::string>();
    m.adv.text = j.at("text").get<std::string>();
    m.query_id = j.at("query_id").get<std::string>();
    m.adv.provenance.base_id = j.value("base_id", std::string());
    m.base_kind = base_kind_from(j.at("base_kind").get<std::string>());
    m.adv.provenance.spec.payload_kind =
        payload_kind_from(j.at("payload_kind").get<std::string>());
    m.adv.provenance.payload = j.value("payload", std::string());
    m.adv.provenance.spec.position = position_from(j.at("position").get<std::string>());
    m.adv.provenance.spec.reps = j.at("reps").get<int>();
    m.adv.provenance.spec.scatter = j.value("scatter", false);
    m.sample_index = j.at("sample_index").get<int>();
    for (const auto& span : j.value("insertion_offsets", nlohmann::json::array()))
        m.adv.provenance.insertion_offsets.emplace_back(span.at(0).get<size_t>(),
                                                        span.at(1).get<size_t>());
    if (j.contains("gen_target_words")) m.gen_target_words = j["gen_target_words"].get<int>();
    return m;
}

inline void save_attacks_jsonl(const std::vector<MaterializedAttack>& attacks,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write attack pool: " + path);
    for (const auto& m : attacks) out << to_json(m).dump() << "\n";
}

inline std::vector<MaterializedAttack> load_attacks_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open attack pool: " + path);
    std::vector<MaterializedAttack> attacks;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            attacks.push_back(materialized_attack_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad attack record: ") + e.what(), line_no);
        }
    }
    return attacks;
}

inline std::vector<MaterializedAttack> materialize_all(const std::vector<AttackInstance>& set) {
    std::vector<MaterializedAttack> out;
    out.reserve(set.size());
    for (const auto& inst : set) out.push_back(materialize(inst));
    return out;
}

}  // namespace rankinject
