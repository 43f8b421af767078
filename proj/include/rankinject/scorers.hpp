#pragma once

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rankinject/clients.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/scoring.hpp"

// Uniform scorer surface consumed by the harness. A scorer ranks a single
// added (or edited) passage against its evaluation pool: the whole corpus for
// retrievers, the BM25 top-100 for the reranker pipeline. Ties always resolve
// against the candidate being ranked.

namespace rankinject {

class RetrievalScorer {
public:
    virtual ~RetrievalScorer() = default;

    virtual const std::string& name() const = 0;

    // Rank of `text` when added to the pool for `query`. `exclude_id` removes
    // one corpus passage (id dedup, or the original passage when configured).
    // nullopt = unranked (the scorer produced no positive lexical score).
    virtual std::optional<int> rank_added(const Query& query, const std::string& text,
                                          const std::string& exclude_id = "") = 0;

    // Baseline corpus ranking, top k.
    virtual std::vector<ScoreRecord> top_k(const Query& query, int k) = 0;

    // Rank after replacing passage `passage_id`'s body with `new_text`.
    virtual std::optional<int> rank_edited(const Query& query, const std::string& passage_id,
                                           const std::string& new_text) = 0;
};

/// Native lexical retriever. Per-query corpus scores are computed once and
/// cached; concurrent rank_added calls are safe.
class Bm25Retriever : public RetrievalScorer {
public:
    Bm25Retriever(std::string name, std::shared_ptr<const LexicalIndex> index,
                  const PassageStore& store)
        : name_(std::move(name)), index_(std::move(index)), store_(store) {}

    const std::string& name() const override { return name_; }
    const LexicalIndex& index() const { return *index_; }

    std::optional<int> rank_added(const Query& query, const std::string& text,
                                  const std::string& exclude_id = "") override {
        const double s = index_->score(query.text, text);
        if (s <= 0.0) return std::nullopt;  // no positive lexical score: unranked
        const auto scores = corpus_scores(query);
        const auto skip = store_.ordinal(exclude_id);
        int rank = 1;
        for (size_t i = 0; i < scores->size(); ++i) {
            if (skip && *skip == i) continue;
            if ((*scores)[i] > 0.0 && (*scores)[i] >= s) ++rank;
        }
        return rank;
    }

    std::vector<ScoreRecord> top_k(const Query& query, int k) override {
        return index_->retrieve(query.text, k, query.id);
    }

    std::optional<int> rank_edited(const Query& query, const std::string& passage_id,
                                   const std::string& new_text) override {
        const Passage* p = store_.find(passage_id);
        if (!p) throw Error("rank_edited: unknown passage id " + passage_id);
        Passage edited = *p;
        edited.text = new_text;
        const double s = index_->score(query.text, effective_text(edited, index_->include_titles()));
        if (s <= 0.0) return std::nullopt;
        const auto scores = corpus_scores(query);
        const auto skip = store_.ordinal(passage_id);
        int rank = 1;
        for (size_t i = 0; i < scores->size(); ++i) {
            if (skip && *skip == i) continue;
            if ((*scores)[i] > 0.0 && (*scores)[i] >= s) ++rank;
        }
        return rank;
    }

private:
    std::shared_ptr<const std::vector<double>> corpus_scores(const Query& query) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(query.id);
        if (it != cache_.end()) return it->second;
        auto scores = std::make_shared<std::vector<double>>(index_->score_all(query.text));
        cache_.emplace(query.id, scores);
        return scores;
    }

    std::string name_;
    std::shared_ptr<const LexicalIndex> index_;
    const PassageStore& store_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<const std::vector<double>>> cache_;
};

/// Remote embedding retriever with an on-disk vector cache. Corpus embeddings
/// are computed (or loaded) once; adversarial texts are embedded on demand.
class EmbeddingRetriever : public RetrievalScorer {
public:
    EmbeddingRetriever(std::string name, EmbeddingClient client, std::string cache_path,
                       const PassageStore& store, bool include_titles = true,
                       size_t batch_size = 32)
        : name_(std::move(name)),
          client_(std::move(client)),
          cache_(std::move(cache_path)),
          store_(store),
          include_titles_(include_titles),
          batch_size_(batch_size) {}

    const std::string& name() const override { return name_; }

    std::optional<int> rank_added(const Query& query, const std::string& text,
                                  const std::string& exclude_id = "") override {
        ensure_corpus();
        const auto sims = query_sims(query);
        const double s = dot(*query_vec(query), embed_one(text));
        const auto skip = store_.ordinal(exclude_id);
        int rank = 1;
        for (size_t i = 0; i < sims->size(); ++i) {
            if (skip && *skip == i) continue;
            if ((*sims)[i] >= s) ++rank;
        }
        return rank;
    }

    std::vector<ScoreRecord> top_k(const Query& query, int k) override {
        if (k <= 0) throw Error("top_k: k must be positive");
        ensure_corpus();
        const auto sims = query_sims(query);
        std::vector<size_t> order(sims->size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if ((*sims)[a] != (*sims)[b]) return (*sims)[a] > (*sims)[b];
            return a < b;
        });
        if (order.size() > static_cast<size_t>(k)) order.resize(static_cast<size_t>(k));
        std::vector<ScoreRecord> out;
        for (size_t r = 0; r < order.size(); ++r)
            out.push_back({query.id, store_[order[r]].id, (*sims)[order[r]],
                           static_cast<int>(r + 1)});
        return out;
    }

    std::optional<int> rank_edited(const Query& query, const std::string& passage_id,
                                   const std::string& new_text) override {
        const Passage* p = store_.find(passage_id);
        if (!p) throw Error("rank_edited: unknown passage id " + passage_id);
        ensure_corpus();
        Passage edited = *p;
        edited.text = new_text;
        const double s = dot(*query_vec(query), embed_one(effective_text(edited, include_titles_)));
        const auto sims = query_sims(query);
        const auto skip = store_.ordinal(passage_id);
        int rank = 1;
        for (size_t i = 0; i < sims->size(); ++i) {
            if (skip && *skip == i) continue;
            if ((*sims)[i] >= s) ++rank;
        }
        return rank;
    }

private:
    std::vector<float> embed_one(const std::string& text) {
        const uint64_t hash = EmbeddingCache::content_hash(text);
        if (const auto* hit = cache_.find(client_.model(), hash)) return *hit;
        auto vecs = client_.embed({text});
        cache_.put(client_.model(), hash, vecs[0]);
        return std::move(vecs[0]);
    }

    void ensure_corpus() {
        std::lock_guard<std::mutex> lock(corpus_mutex_);
        if (!corpus_vecs_.empty()) return;
        corpus_vecs_.resize(store_.size());
        std::vector<size_t> missing;
        std::vector<std::string> texts(store_.size());
        for (size_t i = 0; i < store_.size(); ++i) {
            texts[i] = effective_text(store_[i], include_titles_);
            if (const auto* hit = cache_.find(client_.model(), EmbeddingCache::content_hash(texts[i])))
                corpus_vecs_[i] = *hit;
            else
                missing.push_back(i);
        }
        for (size_t off = 0; off < missing.size(); off += batch_size_) {
            const size_t end = std::min(off + batch_size_, missing.size());
            std::vector<std::string> batch;
            for (size_t j = off; j < end; ++j) batch.push_back(texts[missing[j]]);
            auto vecs = client_.embed(batch);
            for (size_t j = off; j < end; ++j) {
                cache_.put(client_.model(), EmbeddingCache::content_hash(texts[missing[j]]),
                           vecs[j - off]);
                corpus_vecs_[missing[j]] = std::move(vecs[j - off]);
            }
        }
    }

    std::shared_ptr<const std::vector<float>> query_vec(const Query& query) {
        std::lock_guard<std::mutex> lock(query_mutex_);
        auto it = query_vecs_.find(query.id);
        if (it != query_vecs_.end()) return it->second;
        auto vec = std::make_shared<std::vector<float>>();
        {
            const uint64_t hash = EmbeddingCache::content_hash(query.text);
            if (const auto* hit = cache_.find(client_.model(), hash)) {
                *vec = *hit;
            } else {
                *vec = client_.embed({query.text})[0];
                cache_.put(client_.model(), hash, *vec);
            }
        }
        query_vecs_.emplace(query.id, vec);
        return vec;
    }

    std::shared_ptr<const std::vector<double>> query_sims(const Query& query) {
        auto qv = query_vec(query);
        std::lock_guard<std::mutex> lock(query_mutex_);
        auto it = sims_.find(query.id);
        if (it != sims_.end()) return it->second;
        auto sims = std::make_shared<std::vector<double>>(corpus_vecs_.size());
        for (size_t i = 0; i < corpus_vecs_.size(); ++i) (*sims)[i] = dot(*qv, corpus_vecs_[i]);
        sims_.emplace(query.id, sims);
        return sims;
    }

    std::string name_;
    EmbeddingClient client_;
    EmbeddingCache cache_;
    const PassageStore& store_;
    bool include_titles_;
    size_t batch_size_;
    std::mutex corpus_mutex_;
    std::vector<std::vector<float>> corpus_vecs_;
    std::mutex query_mutex_;
    std::unordered_map<std::string, std::shared_ptr<const std::vector<float>>> query_vecs_;
    std::unordered_map<std::string, std::shared_ptr<const std::vector<double>>> sims_;
};

/// Pointwise reranker over BM25 top-100 candidates. Candidate scores are
/// requested once per query (pointwise scores are independent of the batch),
/// then each adversarial passage costs one extra call.
class RerankPipeline : public RetrievalScorer {
public:
    RerankPipeline(std::string name, RerankClient client,
                   std::shared_ptr<const LexicalIndex> index, const PassageStore& store,
                   int candidate_k = 100)
        : name_(std::move(name)),
          client_(std::move(client)),
          index_(std::move(index)),
          store_(store),
          candidate_k_(candidate_k) {}

    const std::string& name() const override { return name_; }

    std::optional<int> rank_added(const Query& query, const std::string& text,
                                  const std::string& exclude_id = "") override {
        const auto cands = candidates(query);
        const double s = client_.rerank(query.text, {text})[0];
        int rank = 1;
        for (const auto& c : cands->list) {
            if (!exclude_id.empty() && c.passage_id == exclude_id) continue;
            if (c.score >= s) ++rank;
        }
        return rank;
    }

    std::vector<ScoreRecord> top_k(const Query& query, int k) override {
        if (k <= 0) throw Error("top_k: k must be positive");
        const auto cands = candidates(query);
        auto sorted = cands->list;
        std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            return a.score > b.score;  // stable: ties keep BM25 candidate order
        });
        if (sorted.size() > static_cast<size_t>(k)) sorted.resize(static_cast<size_t>(k));
        std::vector<ScoreRecord> out;
        for (size_t r = 0; r < sorted.size(); ++r)
            out.push_back({query.id, sorted[r].passage_id, sorted[r].score,
                           static_cast<int>(r + 1)});
        return out;
    }

    std::optional<int> rank_edited(const Query& query, const std::string& passage_id,
                                   const std::string& new_text) override {
        const Passage* p = store_.find(passage_id);
        if (!p) throw Error("rank_edited: unknown passage id " + passage_id);
        const auto cands = candidates(query);
        Passage edited = *p;
        edited.text = new_text;
        const double s =
            client_.rerank(query.text, {effective_text(edited, index_->include_titles())})[0];
        int rank = 1;
        for (const auto& c : cands->list) {
            if (c.passage_id == passage_id) continue;  // replaced by the edited version
            if (c.score >= s) ++rank;
        }
        return rank;
    }

private:
    struct Candidates {
        struct Entry {
            std::string passage_id;
            double score;
        };
        std::vector<Entry> list;
    };

    std::shared_ptr<const Candidates> candidates(const Query& query) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(query.id);
            if (it != cache_.end()) return it->second;
        }
        auto hits = index_->retrieve(query.text, candidate_k_, query.id);
        auto cands = std::make_shared<Candidates>();
        if (!hits.empty()) {
            std::vector<std::string> texts;
            for (const auto& h : hits) {
                const Passage* p = store_.find(h.passage_id);
                if (!p) throw Error("candidate passage missing from store: " + h.passage_id);
                texts.push_back(effective_text(*p, index_->include_titles()));
            }
            auto scores = client_.rerank(query.text, texts);
            for (size_t i = 0; i < hits.size(); ++i)
                cands->list.push_back({hits[i].passage_id, scores[i]});
        }
        std::lock_guard<std::mutex> lock(mutex_);
        auto [it, inserted] = cache_.emplace(query.id, std::move(cands));
        return it->second;
    }

    std::string name_;
    RerankClient client_;
    std::shared_ptr<const LexicalIndex> index_;
    const PassageStore& store_;
    int candidate_k_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<const Candidates>> cache_;
};

/// Judge-backed scorer: grades (query, passage) pairs 0-3 instead of ranking.
class JudgeScorer {
public:
    JudgeScorer(std::string name, JudgeClient client)
        : name_(std::move(name)), client_(std::move(client)) {}

    const std::string& name() const { return name_; }
    const JudgeClient& client() const { return client_; }

    JudgeScore judge(std::string_view query_text, std::string_view passage_text) const {
        return client_.judge(query_text, passage_text);
    }

private:
    std::string name_;
    JudgeClient client_;
};

}  // namespace rankinject
