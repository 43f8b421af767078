#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rankinject/common.hpp"
#include "rankinject/rng.hpp"
#include "rankinject/wordlists.hpp"

// Deterministic text primitives. The sentence splitter and the verb/noun check
// are rule-based stand-ins for an off-the-shelf linguistic pipeline; pools
// built with them are documented approximations, not exact reproductions of
// pools built with a statistical tagger.

namespace rankinject {

namespace detail {

inline uint32_t decode_utf8(std::string_view s, size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra;
    uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
        extra = 1;
        cp = c & 0x1Fu;
    } else if ((c & 0xF0) == 0xE0) {
        extra = 2;
        cp = c & 0x0Fu;
    } else if ((c & 0xF8) == 0xF0) {
        extra = 3;
        cp = c & 0x07u;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + static_cast<size_t>(extra) >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + static_cast<size_t>(k)]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3Fu);
    }
    i += static_cast<size_t>(extra) + 1;
    return cp;
}

inline bool is_unicode_space(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Punctuation stripped from token edges. Interior characters are never
// touched, which is what keeps hyphens and apostrophes inside words.
inline bool is_strippable_punct(uint32_t cp) {
    if (cp < 0x80) {
        char c = static_cast<char>(cp);
        return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
               (c >= '{' && c <= '~');
    }
    switch (cp) {
        case 0x2018: case 0x2019: case 0x201C: case 0x201D: case 0x2013:
        case 0x2014: case 0x2026: case 0x00AB: case 0x00BB: case 0x00A1:
        case 0x00BF: case 0x2039: case 0x203A: case 0x00B7: case 0x2022:
            return true;
        default:
            return false;
    }
}

}  // namespace detail

inline size_t codepoint_count(std::string_view s) {
    size_t i = 0, n = 0;
    while (i < s.size()) {
        detail::decode_utf8(s, i);
        ++n;
    }
    return n;
}

/// Splits on Unicode whitespace, then strips leading/trailing punctuation from
/// each chunk. Case is preserved; empty tokens are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        size_t start = i;
        uint32_t cp = detail::decode_utf8(text, i);
        if (detail::is_unicode_space(cp)) continue;
        // accumulate the chunk as codepoint (offset, next_offset) pairs
        std::vector<std::pair<size_t, size_t>> cps;
        size_t pos = start;
        size_t next = i;
        cps.emplace_back(pos, next);
        while (next < n) {
            pos = next;
            cp = detail::decode_utf8(text, next);
            if (detail::is_unicode_space(cp)) break;
            cps.emplace_back(pos, next);
        }
        i = next;
        size_t lo = 0, hi = cps.size();
        auto cp_at = [&](size_t k) {
            size_t p = cps[k].first;
            return detail::decode_utf8(text, p);
        };
        while (lo < hi && detail::is_strippable_punct(cp_at(lo))) ++lo;
        while (hi > lo && detail::is_strippable_punct(cp_at(hi - 1))) --hi;
        if (lo < hi) {
            tokens.emplace_back(text.substr(cps[lo].first, cps[hi - 1].second - cps[lo].first));
        }
    }
    return tokens;
}

/// Splits after runs of `. ! ?` that are followed by whitespace and an ASCII
/// uppercase letter or digit. A terminator whose surrounding token is on the
/// abbreviation guard list (e.g. "Dr.", "e.g.", "U.S.") never splits.
inline std::vector<std::string> split_sentences(
    std::string_view text,
    const std::unordered_set<std::string>& abbreviations = bundled_abbreviations()) {
    std::vector<std::string> sentences;
    auto is_term = [](char c) { return c == '.' || c == '!' || c == '?'; };
    size_t start = 0;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (!is_term(text[i])) {
            ++i;
            continue;
        }
        size_t run_end = i + 1;
        while (run_end < n && is_term(text[run_end])) ++run_end;
        size_t tok_begin = i;
        while (tok_begin > start && !is_ascii_space(text[tok_begin - 1])) --tok_begin;
        const bool guarded =
            abbreviations.count(to_lower(text.substr(tok_begin, run_end - tok_begin))) > 0;
        size_t j = run_end;
        bool saw_space = false;
        while (j < n && is_ascii_space(text[j])) {
            saw_space = true;
            ++j;
        }
        const bool next_starts_sentence =
            j < n && ((text[j] >= 'A' && text[j] <= 'Z') || (text[j] >= '0' && text[j] <= '9'));
        if (!guarded && saw_space && next_starts_sentence) {
            auto s = trim(text.substr(start, run_end - start));
            if (!s.empty()) sentences.emplace_back(s);
            start = j;
            i = j;
        } else {
            i = run_end;
        }
    }
    auto tail = trim(text.substr(start));
    if (!tail.empty()) sentences.emplace_back(tail);
    return sentences;
}

/// Acceptance rule for payload sentences. `min_chars`/`max_chars` count
/// Unicode codepoints.
struct AdmissibilityRule {
    int min_chars = 30;
    int max_chars = 300;
    int min_words = 5;
    const WordList* verb_lexicon = &bundled_verbs();
    const WordList* noun_lexicon = &bundled_nouns();

    void validate() const {
        if (min_chars >= max_chars)
            throw ConfigError("AdmissibilityRule: min_chars must be < max_chars");
        if (min_words < 1) throw ConfigError("AdmissibilityRule: min_words must be >= 1");
        if (!verb_lexicon || !noun_lexicon || verb_lexicon->size() == 0 ||
            noun_lexicon->size() == 0)
            throw ConfigError("AdmissibilityRule: lexicons must be nonempty");
    }
};

namespace detail {

// Exact match or a stripped plural / third-person -s form.
inline bool lexicon_hit(const WordList& lex, std::string_view tok) {
    if (lex.contains(tok)) return true;
    const size_t n = tok.size();
    if (n > 3 && tok.ends_with("ies") && lex.contains(std::string(tok.substr(0, n - 3)) + "y"))
        return true;
    if (n > 3 && tok.ends_with("es") && lex.contains(tok.substr(0, n - 2))) return true;
    if (n > 2 && tok.ends_with("s") && !tok.ends_with("ss") && lex.contains(tok.substr(0, n - 1)))
        return true;
    return false;
}

// lexicon_hit plus -ed/-ing forms whose stem is lexical.
inline bool verb_hit(const WordList& lex, std::string_view tok) {
    if (lexicon_hit(lex, tok)) return true;
    const size_t n = tok.size();
    auto hit = [&](std::string_view st) { return !st.empty() && lex.contains(st); };
    if (n > 3 && tok.ends_with("ed")) {
        auto stem = tok.substr(0, n - 2);
        if (hit(stem) || hit(tok.substr(0, n - 1))) return true;  // walk+ed, move+d
        if (stem.size() > 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
            hit(stem.substr(0, stem.size() - 1)))
            return true;  // stopp+ed
    }
    if (n > 4 && tok.ends_with("ing")) {
        auto stem = tok.substr(0, n - 3);
        if (hit(stem) || hit(std::string(stem) + "e")) return true;  // walk+ing, mak(e)+ing
        if (stem.size() > 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
            hit(stem.substr(0, stem.size() - 1)))
            return true;  // runn+ing
    }
    return false;
}

}  // namespace detail

/// True iff the sentence is 30-300 chars (per rule), has at least `min_words`
/// tokens, and contains at least one verb-lexicon and one noun-lexicon hit.
inline bool sentence_admissible(std::string_view sentence, const AdmissibilityRule& rule) {
    const size_t chars = codepoint_count(sentence);
    if (chars < static_cast<size_t>(rule.min_chars) || chars > static_cast<size_t>(rule.max_chars))
        return false;
    const auto toks = tokenize(sentence);
    if (toks.size() < static_cast<size_t>(rule.min_words)) return false;
    bool verb = false, noun = false;
    for (const auto& t : toks) {
        const auto lt = to_lower(t);
        if (!verb && detail::verb_hit(*rule.verb_lexicon, lt)) verb = true;
        if (!noun && detail::lexicon_hit(*rule.noun_lexicon, lt)) noun = true;
        if (verb && noun) return true;
    }
    return false;
}

/// Lowercased query tokens minus stopwords, original order, duplicates kept.
/// Throws when nothing survives the stopword filter.
inline std::vector<std::string> extract_keywords(
    std::string_view query_text, const StopwordList& stopwords = bundled_stopwords()) {
    std::vector<std::string> out;
    for (const auto& t : tokenize(query_text)) {
        auto lt = to_lower(t);
        if (!stopwords.contains(lt)) out.push_back(std::move(lt));
    }
    if (out.empty())
        throw Error("extract_keywords: no keywords left after stopword removal: \"" +
                    std::string(query_text) + "\"");
    return out;
}

enum class SentenceSource { msmarco, toxigen, custom };

inline std::string_view to_string(SentenceSource s) {
    switch (s) {
        case SentenceSource::msmarco: return "msmarco";
        case SentenceSource::toxigen: return "toxigen";
        default: return "custom";
    }
}

inline SentenceSource sentence_source_from(std::string_view s) {
    if (s == "msmarco") return SentenceSource::msmarco;
    if (s == "toxigen") return SentenceSource::toxigen;
    if (s == "custom") return SentenceSource::custom;
    throw ParseError("unknown sentence source: " + std::string(s));
}

/// Pool of admissible payload sentences with a character-length histogram
/// (bins of 10 codepoints). Immutable after construction.
class SentencePool {
public:
    static constexpr int kBinWidthChars = 10;

    SentencePool() = default;
    SentencePool(std::vector<std::string> sentences, SentenceSource source)
        : sentences_(std::move(sentences)), source_(source) {
        for (const auto& s : sentences_) ++histogram_[bin_of(s)];
    }

    static int bin_of(std::string_view s) {
        return static_cast<int>(codepoint_count(s) / kBinWidthChars);
    }

    const std::vector<std::string>& sentences() const { return sentences_; }
    SentenceSource source() const { return source_; }
    const std::map<int, size_t>& length_histogram() const { return histogram_; }
    size_t size() const { return sentences_.size(); }
    bool empty() const { return sentences_.empty(); }

    void save_jsonl(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write sentence pool: " + path);
        for (const auto& s : sentences_) {
            nlohmann::json j{{"text", s}, {"source", to_string(source_)}};
            out << j.dump() << "\n";
        }
    }

    // Loads `{"text":..., "source":...}` lines. Sentences failing the rule are
    // dropped (count reported through `dropped`); a mix of sources loads as
    // `custom`.
    static SentencePool load_jsonl(const std::string& path, const AdmissibilityRule& rule,
                                   size_t* dropped = nullptr) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open sentence pool: " + path);
        std::vector<std::string> sentences;
        bool first = true, mixed = false;
        SentenceSource source = SentenceSource::custom;
        std::string line;
        long line_no = 0;
        size_t n_dropped = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("bad sentence pool record: ") + e.what(), line_no);
            }
            if (!j.contains("text") || !j["text"].is_string())
                throw ParseError("sentence pool record missing \"text\"", line_no);
            auto src = j.value("source", std::string("custom"));
            auto parsed = sentence_source_from(src);
            if (first) {
                source = parsed;
                first = false;
            } else if (parsed != source) {
                mixed = true;
            }
            auto text = j["text"].get<std::string>();
            if (sentence_admissible(text, rule)) {
                sentences.push_back(std::move(text));
            } else {
                ++n_dropped;
            }
        }
        if (dropped) *dropped = n_dropped;
        return SentencePool(std::move(sentences), mixed ? SentenceSource::custom : source);
    }

private:
    std::vector<std::string> sentences_;
    SentenceSource source_ = SentenceSource::custom;
    std::map<int, size_t> histogram_;
};

/// Ids of passages eligible as random injection bases.
struct PassagePool {
    std::vector<std::string> passage_ids;
    size_t size() const { return passage_ids.size(); }
    bool empty() const { return passage_ids.empty(); }
};

struct PoolLimits {
    size_t max_passages = 0;  // 0 = unlimited
    size_t max_sentences = 0;
};

struct BuildPoolsResult {
    PassagePool passages;
    SentencePool sentences;
    std::vector<std::string> warnings;
};

/// Scans the store in order: passages with at least one admissible sentence
/// enter the PassagePool, and every admissible sentence enters the
/// SentencePool. Optional caps downsample uniformly under the seed while
/// keeping store order.
template <typename Store>
BuildPoolsResult build_pools(const Store& store, const AdmissibilityRule& rule, uint64_t seed,
                             SentenceSource source = SentenceSource::msmarco,
                             PoolLimits limits = {}) {
    rule.validate();
    std::vector<std::string> ids;
    std::vector<std::string> sents;
    for (const auto& p : store) {
        bool any = false;
        for (auto& s : split_sentences(p.text)) {
            if (sentence_admissible(s, rule)) {
                any = true;
                sents.push_back(std::move(s));
            }
        }
        if (any) ids.push_back(p.id);
    }
    auto cap = [&](std::vector<std::string>& v, size_t limit, std::string_view purpose) {
        if (limit == 0 || v.size() <= limit) return;
        auto keep = stream(seed, std::string("pool/") + std::string(purpose))
                        .sample_indices(v.size(), limit);
        std::sort(keep.begin(), keep.end());
        std::vector<std::string> kept;
        kept.reserve(limit);
        for (auto k : keep) kept.push_back(std::move(v[k]));
        v = std::move(kept);
    };
    cap(ids, limits.max_passages, "passages");
    cap(sents, limits.max_sentences, "sentences");
    BuildPoolsResult result{PassagePool{std::move(ids)}, SentencePool(std::move(sents), source), {}};
    if (result.passages.empty()) result.warnings.emplace_back("passage pool is empty");
    if (result.sentences.empty()) result.warnings.emplace_back("sentence pool is empty");
    return result;
}

/// Token multiset of the whole corpus, in store order. Sampling from it
/// preserves corpus term frequencies.
template <typename Store>
std::vector<std::string> build_word_bank(const Store& store) {
    std::vector<std::string> bank;
    for (const auto& p : store) {
        for (auto& t : tokenize(p.text)) bank.push_back(std::move(t));
    }
    return bank;
}

/// `n` words sampled uniformly with replacement from the bank, space-joined.
inline std::string make_scrambled_passage(const std::vector<std::string>& word_bank, size_t n,
                                          Rng& rng) {
    if (n == 0) throw Error("make_scrambled_passage: n must be >= 1");
    if (word_bank.empty()) throw Error("make_scrambled_passage: empty word bank");
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += word_bank[static_cast<size_t>(rng.bounded(word_bank.size()))];
    }
    return out;
}

/// Downsamples `pool` so its per-bin proportions equal the reference's, using
/// the largest achievable total. Within each bin the survivors are a uniform
/// seeded subset.
inline SentencePool match_length_distribution(const SentencePool& pool,
                                              const SentencePool& reference, Rng& rng) {
    if (pool.empty() || reference.empty())
        throw Error("match_length_distribution: pools must be nonempty");
    std::map<int, std::vector<size_t>> members;
    for (size_t i = 0; i < pool.size(); ++i)
        members[SentencePool::bin_of(pool.sentences()[i])].push_back(i);
    const size_t ref_total = reference.size();
    size_t grand_total = SIZE_MAX;
    for (const auto& [bin, ref_count] : reference.length_histogram()) {
        if (ref_count == 0) continue;
        auto it = members.find(bin);
        const size_t pool_count = it == members.end() ? 0 : it->second.size();
        grand_total = std::min(grand_total, pool_count * ref_total / ref_count);
    }
    if (grand_total == 0 || grand_total == SIZE_MAX)
        throw Error("match_length_distribution: no overlapping length bins");
    std::vector<std::string> out;
    for (const auto& [bin, ref_count] : reference.length_histogram()) {
        if (ref_count == 0) continue;
        const size_t take = ref_count * grand_total / ref_total;
        auto& m = members[bin];
        auto keep = rng.sample_indices(m.size(), take);
        std::sort(keep.begin(), keep.end());
        for (auto k : keep) out.push_back(pool.sentences()[m[k]]);
    }
    return SentencePool(std::move(out), pool.source());
}

}  // namespace rankinject
