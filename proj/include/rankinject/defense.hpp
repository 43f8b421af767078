#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankinject/attackgen.hpp"
#include "rankinject/common.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/report.hpp"
#include "rankinject/rng.hpp"
#include "rankinject/textkit.hpp"
#include "rankinject/wordlists.hpp"

// Injected-passage detector: hashed character n-grams plus a few dense text
// statistics feeding a logistic model. Training data is synthesized with the
// same injection machinery the attacks use.

namespace rankinject {

struct AttackMeta {
    PayloadKind payload_kind = PayloadKind::query;
    BaseKind base_kind = BaseKind::random;
    Position position = Position::start;
    int reps = 1;
    std::optional<SentenceSource> sentence_source;

    std::string config_key() const {
        std::string key{to_string(payload_kind)};
        key += '/';
        key += to_string(base_kind);
        key += '/';
        key += to_string(position);
        key += "/x";
        key += std::to_string(reps);
        return key;
    }
};

struct DefenseExample {
    std::string text;
    bool adversarial = false;
    std::optional<AttackMeta> attack_meta;  // present iff adversarial
};

inline constexpr uint32_t kNgramDim = 1u << 18;
inline constexpr uint32_t kDenseStatCount = 5;
inline constexpr uint32_t kFeatureDim = kNgramDim + kDenseStatCount;
inline constexpr std::string_view kFeaturizerVersion = "hashed-ngram-3.4.5/2^18+stats-v1";

/// Raw text statistics, also exposed unscaled for inspection.
struct DenseStats {
    double max_token_repetition = 0;  // highest per-token occurrence count
    double stopword_ratio = 0;
    double char_length = 0;  // codepoints
    double token_count = 0;
    double admissible_sentence_ratio = 0;
};

inline DenseStats dense_stats(std::string_view text,
                              const StopwordList& stopwords = bundled_stopwords(),
                              const AdmissibilityRule& rule = {}) {
    DenseStats stats;
    const auto toks = tokenize(text);
    stats.token_count = static_cast<double>(toks.size());
    stats.char_length = static_cast<double>(codepoint_count(text));
    std::map<std::string, size_t> counts;
    size_t stop = 0;
    for (const auto& t : toks) {
        auto lt = to_lower(t);
        if (stopwords.contains(lt)) ++stop;
        stats.max_token_repetition =
            std::max(stats.max_token_repetition, static_cast<double>(++counts[lt]));
    }
    if (!toks.empty()) stats.stopword_ratio = static_cast<double>(stop) / toks.size();
    const auto sentences = split_sentences(text);
    if (!sentences.empty()) {
        size_t admissible = 0;
        for (const auto& s : sentences)
            if (sentence_admissible(s, rule)) ++admissible;
        stats.admissible_sentence_ratio = static_cast<double>(admissible) / sentences.size();
    }
    return stats;
}

/// Sparse unit-L2 feature vector: hashed 3/4/5-gram counts over the lowercased
/// bytes, plus the dense stats squashed into [0, 1] so no single coordinate
/// drowns the n-gram mass.
struct FeatureVector {
    std::vector<std::pair<uint32_t, float>> entries;  // sorted by index
};

inline FeatureVector featurize(std::string_view text,
                               const StopwordList& stopwords = bundled_stopwords(),
                               const AdmissibilityRule& rule = {}) {
    if (trim(text).empty()) throw Error("featurize: empty text");
    const std::string lower = to_lower(text);
    std::map<uint32_t, float> acc;
    for (size_t n : {3u, 4u, 5u}) {
        if (lower.size() < n) continue;
        for (size_t i = 0; i + n <= lower.size(); ++i) {
            const uint32_t idx =
                static_cast<uint32_t>(fnv1a64(std::string_view(lower).substr(i, n)) &
                                      (kNgramDim - 1));
            acc[idx] += 1.0f;
        }
    }
    const auto stats = dense_stats(text, stopwords, rule);
    acc[kNgramDim + 0] = static_cast<float>(std::min(stats.max_token_repetition, 50.0) / 50.0);
    acc[kNgramDim + 1] = static_cast<float>(stats.stopword_ratio);
    acc[kNgramDim + 2] = static_cast<float>(std::min(stats.char_length, 1000.0) / 1000.0);
    acc[kNgramDim + 3] = static_cast<float>(std::min(stats.token_count, 500.0) / 500.0);
    acc[kNgramDim + 4] = static_cast<float>(stats.admissible_sentence_ratio);

    FeatureVector vec;
    double norm = 0;
    for (const auto& [idx, value] : acc) norm += static_cast<double>(value) * value;
    const float inv = norm > 0 ? static_cast<float>(1.0 / std::sqrt(norm)) : 0.0f;
    vec.entries.reserve(acc.size());
    for (const auto& [idx, value] : acc) {
        if (value != 0.0f) vec.entries.emplace_back(idx, value * inv);
    }
    return vec;
}

/// Logistic detector over the hashed features. Saved with its featurizer
/// version so stale models are rejected at load time.
class LinearModel {
public:
    LinearModel() : weights_(kFeatureDim, 0.0f) {}

    double predict_probability(const FeatureVector& features) const {
        double z = bias_;
        for (const auto& [idx, value] : features.entries)
            z += static_cast<double>(weights_[idx]) * value;
        return 1.0 / (1.0 + std::exp(-z));
    }

    bool flag(const FeatureVector& features) const {
        return predict_probability(features) >= threshold_;
    }

    bool flag_text(std::string_view text) const { return flag(featurize(text)); }

    double threshold() const { return threshold_; }
    void set_threshold(double t) { threshold_ = t; }
    uint64_t train_config_hash() const { return train_config_hash_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write model: " + path);
        out.write(kMagic, 8);
        const std::string version{kFeaturizerVersion};
        const uint32_t vlen = static_cast<uint32_t>(version.size());
        out.write(reinterpret_cast<const char*>(&vlen), 4);
        out.write(version.data(), vlen);
        const uint32_t dim = kFeatureDim;
        out.write(reinterpret_cast<const char*>(&dim), 4);
        out.write(reinterpret_cast<const char*>(&bias_), sizeof(bias_));
        out.write(reinterpret_cast<const char*>(&threshold_), sizeof(threshold_));
        out.write(reinterpret_cast<const char*>(&train_config_hash_), 8);
        out.write(reinterpret_cast<const char*>(weights_.data()),
                  static_cast<std::streamsize>(weights_.size() * sizeof(float)));
        if (!out) throw Error("model write failed: " + path);
    }

    static LinearModel load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open model: " + path);
        char magic[8];
        if (!in.read(magic, 8) || std::string_view(magic, 8) != kMagic)
            throw ParseError("not a rankinject model file: " + path);
        uint32_t vlen = 0;
        in.read(reinterpret_cast<char*>(&vlen), 4);
        std::string version(vlen, '\0');
        in.read(version.data(), vlen);
        if (version != kFeaturizerVersion)
            throw ParseError("model featurizer version mismatch: " + version);
        uint32_t dim = 0;
        in.read(reinterpret_cast<char*>(&dim), 4);
        if (dim != kFeatureDim) throw ParseError("model dimension mismatch");
        LinearModel model;
        in.read(reinterpret_cast<char*>(&model.bias_), sizeof(model.bias_));
        in.read(reinterpret_cast<char*>(&model.threshold_), sizeof(model.threshold_));
        in.read(reinterpret_cast<char*>(&model.train_config_hash_), 8);
        in.read(reinterpret_cast<char*>(model.weights_.data()),
                static_cast<std::streamsize>(model.weights_.size() * sizeof(float)));
        if (!in) throw ParseError("truncated model file: " + path);
        return model;
    }

private:
    friend LinearModel train_classifier(const std::vector<DefenseExample>&,
                                        const struct TrainConfig&, std::vector<double>*);
    static constexpr const char* kMagic = "RINJLM01";
    std::vector<float> weights_;
    double bias_ = 0.0;
    double threshold_ = 0.5;
    uint64_t train_config_hash_ = 0;
};

struct TrainConfig {
    int epochs = 8;
    double learning_rate = 0.5;
    double l2 = 1e-7;
    uint64_t seed = 0;
    double threshold = 0.5;

    uint64_t hash() const {
        std::string repr = std::to_string(epochs) + "/" + std::to_string(learning_rate) + "/" +
                           std::to_string(l2) + "/" + std::to_string(seed) + "/" +
                           std::to_string(threshold);
        return fnv1a64(repr);
    }
};

/// SGD on the logistic loss with L2 applied to touched coordinates. Example
/// order is reshuffled per epoch from the seed, so training is deterministic.
/// `epoch_loss`, when given, receives the full-dataset mean loss after each
/// epoch.
inline LinearModel train_classifier(const std::vector<DefenseExample>& dataset,
                                    const TrainConfig& config,
                                    std::vector<double>* epoch_loss = nullptr) {
    bool has_pos = false, has_neg = false;
    for (const auto& ex : dataset) (ex.adversarial ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw Error("train_classifier: dataset must contain both labels");

    std::vector<FeatureVector> features;
    features.reserve(dataset.size());
    for (const auto& ex : dataset) features.push_back(featurize(ex.text));

    LinearModel model;
    model.threshold_ = config.threshold;
    model.train_config_hash_ = config.hash();
    auto& w = model.weights_;

    std::vector<size_t> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng = stream(config.seed, "defense/train/epoch/" + std::to_string(epoch));
        rng.shuffle(order);
        for (size_t i : order) {
            const double y = dataset[i].adversarial ? 1.0 : 0.0;
            const double p = model.predict_probability(features[i]);
            const double err = p - y;
            for (const auto& [idx, value] : features[i].entries) {
                w[idx] -= static_cast<float>(config.learning_rate *
                                             (err * value + config.l2 * w[idx]));
            }
            model.bias_ -= config.learning_rate * err;
        }
        if (epoch_loss) {
            double loss = 0;
            for (size_t i = 0; i < dataset.size(); ++i) {
                const double y = dataset[i].adversarial ? 1.0 : 0.0;
                const double p =
                    std::clamp(model.predict_probability(features[i]), 1e-12, 1.0 - 1e-12);
                loss += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
            }
            epoch_loss->push_back(loss / static_cast<double>(dataset.size()));
        }
    }
    return model;
}

struct DefenseDatasetOptions {
    size_t total_examples = 4000;  // benign + adversarial, interleaved 1:1
    SentenceSource sentence_source = SentenceSource::msmarco;
};

/// Synthesizes the training stream: per query, one query-or-keyword injection
/// into a random-or-scrambled base and one sentence injection into a
/// qrels-relevant passage, each preceded by a benign corpus passage. All free
/// choices (kind, base, reps 1-3, position) are drawn uniformly from named
/// streams. The interleaving keeps any window balanced within one example.
inline std::vector<DefenseExample> make_defense_dataset(
    const EvalSet& eval, const PassageStore& store, const PassagePool& passage_pool,
    const std::vector<std::string>& word_bank, const SentencePool& sentences, uint64_t seed,
    const DefenseDatasetOptions& options = {}) {
    if (sentences.empty()) throw Error("make_defense_dataset: sentence pool is empty");
    if (passage_pool.empty()) throw Error("make_defense_dataset: passage pool is empty");
    if (word_bank.empty()) throw Error("make_defense_dataset: word bank is empty");
    if (eval.queries.empty()) throw Error("make_defense_dataset: no queries");

    static const Position kPositions[] = {Position::start, Position::middle, Position::end};
    std::vector<DefenseExample> out;
    out.reserve(options.total_examples);

    auto benign = [&](Rng& rng) {
        DefenseExample ex;
        ex.text = store[static_cast<size_t>(rng.bounded(store.size()))].text;
        return ex;
    };

    size_t cycle = 0;
    while (out.size() < options.total_examples) {
        for (const auto& query : eval.queries) {
            if (out.size() >= options.total_examples) break;
            const std::string tag = query.id + "/" + std::to_string(cycle);

            // (1) query or keyword injection into a random or scrambled base
            {
                Rng rng = stream(seed, "defense/data/qk/" + tag);
                out.push_back(benign(rng));
                if (out.size() >= options.total_examples) break;
                AttackMeta meta;
                meta.payload_kind =
                    rng.bounded(2) == 0 ? PayloadKind::query : PayloadKind::keywords;
                meta.base_kind = rng.bounded(2) == 0 ? BaseKind::random : BaseKind::scrambled;
                meta.position = kPositions[rng.bounded(3)];
                meta.reps = 1 + static_cast<int>(rng.bounded(3));
                const auto& base_id =
                    passage_pool.passage_ids[static_cast<size_t>(rng.bounded(passage_pool.size()))];
                const Passage* base = store.find(base_id);
                if (!base) continue;
                std::string base_text = base->text;
                if (meta.base_kind == BaseKind::scrambled)
                    base_text =
                        make_scrambled_passage(word_bank, tokenize(base->text).size(), rng);
                std::string payload = query.text;
                if (meta.payload_kind == PayloadKind::keywords) {
                    try {
                        payload = join(extract_keywords(query.text), " ");
                    } catch (const Error&) {
                        meta.payload_kind = PayloadKind::query;  // stopword-only query
                    }
                }
                InjectionSpec spec{meta.payload_kind, meta.position, meta.reps, false};
                DefenseExample ex;
                ex.adversarial = true;
                ex.attack_meta = meta;
                ex.text = inject(base_text, payload, spec, rng).text;
                out.push_back(std::move(ex));
            }
            if (out.size() >= options.total_examples) break;

            // (2) sentence injection into a qrels-relevant passage
            {
                Rng rng = stream(seed, "defense/data/sent/" + tag);
                out.push_back(benign(rng));
                if (out.size() >= options.total_examples) break;
                const Passage* relevant = nullptr;
                auto qrels = eval.relevant(query.id);
                std::vector<const Passage*> present;
                for (const auto* qrel : qrels) {
                    if (const Passage* p = store.find(qrel->passage_id)) present.push_back(p);
                }
                if (!present.empty())
                    relevant = present[static_cast<size_t>(rng.bounded(present.size()))];
                AttackMeta meta;
                meta.payload_kind = PayloadKind::sentence;
                meta.base_kind = BaseKind::relevant;
                meta.position = kPositions[rng.bounded(3)];
                meta.reps = 1 + static_cast<int>(rng.bounded(3));
                meta.sentence_source = sentences.source();
                const auto& sentence = rng.pick(sentences.sentences());
                // fall back to a pool passage when no qrels passage is in store
                const std::string base_text =
                    relevant ? relevant->text
                             : store.find(passage_pool.passage_ids[static_cast<size_t>(
                                              rng.bounded(passage_pool.size()))])
                                   ->text;
                InjectionSpec spec{meta.payload_kind, meta.position, meta.reps, false};
                DefenseExample ex;
                ex.adversarial = true;
                ex.attack_meta = meta;
                ex.text = inject(base_text, sentence, spec, rng).text;
                out.push_back(std::move(ex));
            }
        }
        ++cycle;
    }
    return out;
}

struct LabeledAttackText {
    std::string config_key;  // equal-weighting bucket
    std::string text;
};

struct DefenseEvalInputs {
    std::map<std::string, std::vector<std::string>> benign_by_corpus;
    std::map<std::string, std::vector<LabeledAttackText>> attacks_by_type;
};

/// False-positive rate per corpus and per-attack-type miss rate. Attack
/// configurations are equally weighted: the per-type error is the unweighted
/// mean of per-configuration error rates.
inline DefenseReport eval_defense(const LinearModel& model, const DefenseEvalInputs& inputs) {
    if (inputs.benign_by_corpus.empty() && inputs.attacks_by_type.empty())
        throw Error("eval_defense: nothing to evaluate");
    DefenseReport report;
    for (const auto& [corpus, texts] : inputs.benign_by_corpus) {
        if (texts.empty()) throw Error("eval_defense: empty benign set for " + corpus);
        size_t flagged = 0;
        for (const auto& t : texts) flagged += model.flag_text(t) ? 1 : 0;
        report.false_positive_pct[corpus] =
            100.0 * static_cast<double>(flagged) / static_cast<double>(texts.size());
        report.benign_counts[corpus] = texts.size();
    }
    for (const auto& [type, attacks] : inputs.attacks_by_type) {
        if (attacks.empty()) throw Error("eval_defense: empty attack set for " + type);
        std::map<std::string, std::pair<size_t, size_t>> per_config;  // missed, total
        for (const auto& attack : attacks) {
            auto& [missed, total] = per_config[attack.config_key];
            ++total;
            if (!model.flag_text(attack.text)) ++missed;
        }
        double sum = 0;
        for (const auto& [config, counts] : per_config)
            sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
        report.error_pct[type] = 100.0 * sum / static_cast<double>(per_config.size());
        report.attack_counts[type] = attacks.size();
    }
    return report;
}

/// Seeded sentence-level split (e.g. 80/10/10) used to keep training and
/// evaluation payload sentences disjoint.
inline std::vector<SentencePool> split_sentence_pool(const SentencePool& pool,
                                                     const std::vector<double>& ratios,
                                                     uint64_t seed) {
    double total = 0;
    for (double r : ratios) total += r;
    if (ratios.empty() || total <= 0) throw Error("split_sentence_pool: bad ratios");
    Rng rng = stream(seed, "defense/split");
    auto order = rng.sample_indices(pool.size(), pool.size());
    std::vector<SentencePool> out;
    size_t start = 0;
    for (size_t part = 0; part < ratios.size(); ++part) {
        size_t count = part + 1 == ratios.size()
                           ? pool.size() - start
                           : static_cast<size_t>(
                                 std::floor(ratios[part] / total *
                                            static_cast<double>(pool.size())));
        std::vector<std::string> sentences;
        for (size_t i = start; i < std::min(start + count, order.size()); ++i)
            sentences.push_back(pool.sentences()[order[i]]);
        start += count;
        out.emplace_back(std::move(sentences), pool.source());
    }
    return out;
}

}  // namespace rankinject
