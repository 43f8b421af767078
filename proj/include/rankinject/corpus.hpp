#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rankinject/common.hpp"
#include "rankinject/rng.hpp"
#include "rankinject/textkit.hpp"

namespace rankinject {

struct Passage {
    std::string id;
    std::string title;
    std::string text;
    std::string source;
};

/// Immutable passage store. Loaders build it once; afterwards it is read-only
/// and safe for unrestricted concurrent reads. Iteration order is load order.
class PassageStore {
public:
    void add(Passage p) {
        if (p.id.empty()) throw ParseError("passage id is empty");
        if (trim(p.text).empty()) throw ParseError("passage text is empty: id=" + p.id);
        auto [it, inserted] = index_.emplace(p.id, passages_.size());
        if (!inserted) throw ParseError("duplicate passage id: " + p.id);
        passages_.push_back(std::move(p));
    }

    size_t size() const { return passages_.size(); }
    bool empty() const { return passages_.empty(); }
    const Passage& operator[](size_t i) const { return passages_[i]; }

    const Passage* find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &passages_[it->second];
    }

    std::optional<size_t> ordinal(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    auto begin() const { return passages_.begin(); }
    auto end() const { return passages_.end(); }

private:
    std::vector<Passage> passages_;
    std::unordered_map<std::string, size_t> index_;
};

enum class CorpusFormat { beir_jsonl, msmarco_tsv };

inline CorpusFormat corpus_format_from(std::string_view s) {
    if (s == "beir-jsonl") return CorpusFormat::beir_jsonl;
    if (s == "msmarco-tsv") return CorpusFormat::msmarco_tsv;
    throw ParseError("unknown corpus format: " + std::string(s));
}

inline std::string_view to_string(CorpusFormat f) {
    return f == CorpusFormat::beir_jsonl ? "beir-jsonl" : "msmarco-tsv";
}

/// beir-jsonl: one JSON object per line with `_id`, `title`, `text`.
/// msmarco-tsv: `docid<TAB>text`. Line numbers in errors are 1-based.
inline PassageStore load_corpus(const std::string& path, CorpusFormat format,
                                std::string source_tag = "") {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus: " + path);
    if (source_tag.empty()) source_tag = std::string(to_string(format));
    PassageStore store;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        Passage p;
        p.source = source_tag;
        if (format == CorpusFormat::beir_jsonl) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("malformed JSONL: ") + e.what(), line_no);
            }
            if (!j.contains("_id"))
                throw ParseError("JSONL record missing \"_id\"", line_no);
            p.id = j["_id"].is_string() ? j["_id"].get<std::string>() : j["_id"].dump();
            if (j.contains("title") && j["title"].is_string())
                p.title = j["title"].get<std::string>();
            if (!j.contains("text") || !j["text"].is_string())
                throw ParseError("JSONL record missing \"text\"", line_no);
            p.text = j["text"].get<std::string>();
        } else {
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ParseError("expected docid<TAB>text", line_no);
            p.id = std::string(trim(line.substr(0, tab)));
            p.text = line.substr(tab + 1);
            if (!p.text.empty() && p.text.back() == '\r') p.text.pop_back();
        }
        try {
            store.add(std::move(p));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return store;
}

inline void save_corpus_jsonl(const PassageStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write corpus: " + path);
    for (const auto& p : store) {
        nlohmann::json j{{"_id", p.id}, {"title", p.title}, {"text", p.text}};
        out << j.dump() << "\n";
    }
}

/// Text handed to scorers: "title. text" when titles are enabled and present.
inline std::string effective_text(const Passage& p, bool include_titles) {
    if (!include_titles || p.title.empty()) return p.text;
    return p.title + ". " + p.text;
}

struct Query {
    std::string id;
    std::string text;
};

struct QrelEntry {
    std::string query_id;
    std::string passage_id;
    int grade = 0;
};

/// Relevance judgments. (query_id, passage_id) pairs are unique and grades lie
/// in {0,1,2,3}.
class QrelsTable {
public:
    void add(QrelEntry e) {
        if (e.grade < 0 || e.grade > 3)
            throw ParseError("qrel grade out of range 0-3: " + std::to_string(e.grade));
        auto key = e.query_id + '\t' + e.passage_id;
        if (!seen_.insert(key).second)
            throw ParseError("duplicate qrel pair: " + e.query_id + " " + e.passage_id);
        by_query_[e.query_id].push_back(entries_.size());
        entries_.push_back(std::move(e));
    }

    const std::vector<QrelEntry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }

    // Passages judged at or above `min_grade` for a query, in file order.
    std::vector<const QrelEntry*> relevant(std::string_view query_id, int min_grade) const {
        std::vector<const QrelEntry*> out;
        auto it = by_query_.find(std::string(query_id));
        if (it == by_query_.end()) return out;
        for (auto idx : it->second) {
            if (entries_[idx].grade >= min_grade) out.push_back(&entries_[idx]);
        }
        return out;
    }

private:
    std::vector<QrelEntry> entries_;
    std::unordered_map<std::string, std::vector<size_t>> by_query_;
    std::unordered_set<std::string> seen_;
};

/// Queries retained for evaluation (each has at least one qrel at or above
/// `min_grade`) plus the full qrels table.
struct EvalSet {
    std::vector<Query> queries;
    QrelsTable qrels;
    int min_grade = 1;
    std::vector<std::string> warnings;

    const Query* find_query(std::string_view id) const {
        for (const auto& q : queries)
            if (q.id == id) return &q;
        return nullptr;
    }

    std::vector<const QrelEntry*> relevant(std::string_view query_id) const {
        return qrels.relevant(query_id, min_grade);
    }
};

/// Queries: `qid<TAB>text`. Qrels: whitespace-separated `qid 0 docid grade`.
/// Queries without any qrel at or above `min_grade` are dropped; qrels naming
/// unknown queries are kept with a warning.
inline EvalSet load_eval_set(const std::string& queries_path, const std::string& qrels_path,
                             int min_grade = 1) {
    EvalSet set;
    set.min_grade = min_grade;

    std::vector<Query> all_queries;
    std::unordered_set<std::string> query_ids;
    {
        std::ifstream in(queries_path);
        if (!in) throw Error("cannot open queries: " + queries_path);
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ParseError("expected qid<TAB>text in " + queries_path, line_no);
            Query q;
            q.id = std::string(trim(line.substr(0, tab)));
            q.text = std::string(trim(line.substr(tab + 1)));
            if (q.id.empty() || q.text.empty())
                throw ParseError("empty query id or text in " + queries_path, line_no);
            if (!query_ids.insert(q.id).second)
                throw ParseError("duplicate query id: " + q.id, line_no);
            all_queries.push_back(std::move(q));
        }
    }
    {
        std::ifstream in(qrels_path);
        if (!in) throw Error("cannot open qrels: " + qrels_path);
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            std::vector<std::string> fields;
            for (auto& f : split(std::string(trim(line)), ' ')) {
                if (!f.empty()) fields.push_back(f);
            }
            if (fields.size() == 1) {  // tab-separated variant
                fields.clear();
                for (auto& f : split(std::string(trim(line)), '\t'))
                    if (!trim(f).empty()) fields.emplace_back(trim(f));
            }
            if (fields.size() != 4)
                throw ParseError("expected 4 qrel fields in " + qrels_path, line_no);
            QrelEntry e;
            e.query_id = fields[0];
            e.passage_id = fields[2];
            try {
                size_t used = 0;
                e.grade = std::stoi(fields[3], &used);
                if (used != fields[3].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                throw ParseError("bad qrel grade \"" + fields[3] + "\"", line_no);
            }
            if (!query_ids.count(e.query_id))
                set.warnings.push_back("qrel for unknown query id " + e.query_id + " at line " +
                                       std::to_string(line_no) + "; entry kept");
            try {
                set.qrels.add(std::move(e));
            } catch (const ParseError& err) {
                throw ParseError(err.what(), line_no);
            }
        }
    }
    for (auto& q : all_queries) {
        if (!set.qrels.relevant(q.id, min_grade).empty()) set.queries.push_back(std::move(q));
    }
    return set;
}

struct CorpusStats {
    size_t num_passages = 0;
    double avg_words = 0.0;
    double avg_sentences = 0.0;
};

/// Word counts use the toolkit tokenizer and sentence counts the toolkit
/// splitter, so figures are approximations of pipelines built on other tools.
inline CorpusStats corpus_stats(const PassageStore& store) {
    if (store.empty()) throw Error("corpus_stats: empty store");
    size_t words = 0, sentences = 0;
    for (const auto& p : store) {
        words += tokenize(p.text).size();
        sentences += split_sentences(p.text).size();
    }
    CorpusStats s;
    s.num_passages = store.size();
    s.avg_words = static_cast<double>(words) / static_cast<double>(store.size());
    s.avg_sentences = static_cast<double>(sentences) / static_cast<double>(store.size());
    return s;
}

/// Seeded uniform subsample for desk-scale runs. Passages named in `force_ids`
/// (typically every qrel passage) are always retained; store order is kept.
inline PassageStore subsample_store(const PassageStore& store, size_t target, uint64_t seed,
                                    const std::vector<std::string>& force_ids = {}) {
    if (target == 0 || target >= store.size()) {
        PassageStore copy;
        for (const auto& p : store) copy.add(p);
        return copy;
    }
    std::unordered_set<size_t> keep;
    for (const auto& id : force_ids) {
        if (auto ord = store.ordinal(id)) keep.insert(*ord);
    }
    Rng rng = stream(seed, "corpus/subsample");
    std::vector<size_t> order = rng.sample_indices(store.size(), store.size());
    for (size_t i = 0; i < order.size() && keep.size() < target; ++i) keep.insert(order[i]);
    std::vector<size_t> sorted(keep.begin(), keep.end());
    std::sort(sorted.begin(), sorted.end());
    PassageStore out;
    for (auto i : sorted) out.add(store[i]);
    return out;
}

}  // namespace rankinject
