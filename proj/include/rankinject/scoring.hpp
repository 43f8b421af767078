#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rankinject/common.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/textkit.hpp"

namespace rankinject {

struct ScoreRecord {
    std::string query_id;
    std::string passage_id;
    double score = 0.0;
    std::optional<int> rank;
};

/// Integer relevance grade assigned by an LLM judge, 0-3.
struct JudgeScore {
    int value = 0;
    explicit JudgeScore(int v) : value(v) {
        if (v < 0 || v > 3) throw Error("JudgeScore out of range 0-3: " + std::to_string(v));
    }
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const {
        if (!(k1 > 0)) throw ConfigError("Bm25Params: k1 must be > 0");
        if (!(b >= 0 && b <= 1)) throw ConfigError("Bm25Params: b must be in [0, 1]");
    }
};

/// Worst rank among equal scores: 1 + #(others > s) + #(others == s). The
/// candidate being ranked is never credited on a tie.
inline int rank_against(const std::vector<double>& other_scores, double s) {
    int rank = 1;
    for (double o : other_scores) {
        if (o >= s) ++rank;
    }
    return rank;
}

/// In-memory inverted index with BM25 scoring.
///
/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
/// score  = sum over query tokens of idf * tf*(k1+1) / (tf + k1*(1 - b + b*dl/avgdl))
///
/// Terms absent from the index vocabulary contribute nothing, including when
/// scoring out-of-index passages on the fly. Duplicated query tokens
/// contribute once per occurrence. The index is immutable after build and safe
/// for concurrent reads.
class LexicalIndex {
public:
    static LexicalIndex build(const PassageStore& store, Bm25Params params = {},
                              bool include_titles = true) {
        params.validate();
        if (store.empty()) throw Error("bm25_build: empty store");
        LexicalIndex index;
        index.params_ = params;
        index.include_titles_ = include_titles;
        size_t total_len = 0;
        for (const auto& p : store) {
            const uint32_t ord = static_cast<uint32_t>(index.doc_ids_.size());
            index.doc_ids_.push_back(p.id);
            std::unordered_map<std::string, uint32_t> tf;
            size_t dl = 0;
            for (const auto& t : tokenize(effective_text(p, include_titles))) {
                ++tf[to_lower(t)];
                ++dl;
            }
            index.doc_lengths_.push_back(static_cast<uint32_t>(dl));
            total_len += dl;
            for (auto& [term, count] : tf) index.postings_[term].emplace_back(ord, count);
        }
        index.avgdl_ = static_cast<double>(total_len) / static_cast<double>(store.size());
        return index;
    }

    size_t doc_count() const { return doc_ids_.size(); }
    double avgdl() const { return avgdl_; }
    const Bm25Params& params() const { return params_; }
    bool include_titles() const { return include_titles_; }
    const std::string& doc_id(size_t ord) const { return doc_ids_[ord]; }

    size_t doc_frequency(std::string_view term) const {
        auto it = postings_.find(std::string(term));
        return it == postings_.end() ? 0 : it->second.size();
    }

    double idf(std::string_view term) const {
        const size_t df = doc_frequency(term);
        if (df == 0) return 0.0;
        const double n = static_cast<double>(doc_count());
        const double dfd = static_cast<double>(df);
        return std::log(1.0 + (n - dfd + 0.5) / (dfd + 0.5));
    }

    // BM25 score of an arbitrary passage text against the query, using the
    // index's statistics. Out-of-vocabulary terms contribute 0.
    double score(std::string_view query_text, std::string_view passage_text) const {
        std::unordered_map<std::string, uint32_t> tf;
        size_t dl = 0;
        for (const auto& t : tokenize(passage_text)) {
            ++tf[to_lower(t)];
            ++dl;
        }
        double total = 0.0;
        for (const auto& term : query_terms(query_text)) {
            auto it = tf.find(term);
            if (it == tf.end()) continue;
            const double w = idf(term);
            if (w == 0.0) continue;
            total += w * term_weight(it->second, static_cast<uint32_t>(dl));
        }
        return total;
    }

    // Scores for every indexed document, accumulated in query-token order so
    // results are bit-identical to a per-document rescoring loop.
    std::vector<double> score_all(std::string_view query_text) const {
        std::vector<double> scores(doc_count(), 0.0);
        for (const auto& term : query_terms(query_text)) {
            auto it = postings_.find(term);
            if (it == postings_.end()) continue;
            const double w = idf(term);
            for (const auto& [ord, tf] : it->second) {
                scores[ord] += w * term_weight(tf, doc_lengths_[ord]);
            }
        }
        return scores;
    }

    // Top-k positive-scoring documents ordered by (score desc, store order
    // asc). Documents scoring 0 are not hits and never appear.
    std::vector<ScoreRecord> retrieve(std::string_view query_text, int k,
                                      std::string_view query_id = "") const {
        if (k <= 0) throw Error("bm25_retrieve: k must be positive");
        const auto scores = score_all(query_text);
        std::vector<uint32_t> hits;
        for (uint32_t i = 0; i < scores.size(); ++i) {
            if (scores[i] > 0.0) hits.push_back(i);
        }
        std::sort(hits.begin(), hits.end(), [&](uint32_t a, uint32_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        if (hits.size() > static_cast<size_t>(k)) hits.resize(static_cast<size_t>(k));
        std::vector<ScoreRecord> out;
        out.reserve(hits.size());
        for (size_t r = 0; r < hits.size(); ++r) {
            out.push_back(ScoreRecord{std::string(query_id), doc_ids_[hits[r]], scores[hits[r]],
                                      static_cast<int>(r + 1)});
        }
        return out;
    }

    static std::vector<std::string> query_terms(std::string_view query_text) {
        std::vector<std::string> terms;
        for (const auto& t : tokenize(query_text)) terms.push_back(to_lower(t));
        return terms;
    }

private:
    double term_weight(uint32_t tf, uint32_t dl) const {
        const double f = static_cast<double>(tf);
        const double norm =
            params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(dl) / avgdl_);
        return f * (params_.k1 + 1.0) / (f + norm);
    }

    std::unordered_map<std::string, std::vector<std::pair<uint32_t, uint32_t>>> postings_;
    std::vector<std::string> doc_ids_;
    std::vector<uint32_t> doc_lengths_;
    double avgdl_ = 0.0;
    Bm25Params params_;
    bool include_titles_ = true;
};

inline LexicalIndex bm25_build(const PassageStore& store, Bm25Params params = {},
                               bool include_titles = true) {
    return LexicalIndex::build(store, params, include_titles);
}

}  // namespace rankinject
