#pragma once

#include <string>
#include <vector>

#include "rankinject/corpus.hpp"
#include "rankinject/rng.hpp"
#include "rankinject/wordlists.hpp"

// Seeded English-like corpus generator built from the bundled lexicons.
// Passages are a few sentences of "The <noun> <verb>s the <noun> ..." shape,
// so the toolkit's splitter and admissibility rule accept most of them, and
// queries mention content words of one designated relevant passage.

namespace testsupport {

inline const std::vector<std::string>& synth_nouns() {
    static const auto words = rankinject::bundled_nouns().sorted_words();
    return words;
}

inline const std::vector<std::string>& synth_verbs() {
    static const auto words = rankinject::bundled_verbs().sorted_words();
    return words;
}

inline std::string synth_sentence(rankinject::Rng& rng) {
    const auto& nouns = synth_nouns();
    const auto& verbs = synth_verbs();
    auto noun = [&] { return nouns[rng.bounded(nouns.size())]; };
    auto verb = [&] { return verbs[rng.bounded(verbs.size())] + "s"; };
    std::string s = "The " + noun() + " " + verb() + " the " + noun();
    const int tails = 1 + static_cast<int>(rng.bounded(3));
    static const char* preps[] = {"near", "inside", "behind", "without", "beyond"};
    for (int t = 0; t < tails; ++t) {
        s += " ";
        s += preps[rng.bounded(5)];
        s += " the " + noun();
    }
    s += " and " + verb() + " the " + noun() + ".";
    return s;
}

inline std::string synth_passage(rankinject::Rng& rng, int min_sentences = 2,
                                 int max_sentences = 5) {
    const int n = min_sentences +
                  static_cast<int>(rng.bounded(
                      static_cast<uint64_t>(max_sentences - min_sentences + 1)));
    std::string text;
    for (int i = 0; i < n; ++i) {
        if (i) text += " ";
        text += synth_sentence(rng);
    }
    return text;
}

struct SynthData {
    rankinject::PassageStore store;
    rankinject::EvalSet eval;
};

// `n_queries` queries are derived from the first `n_queries` passages; each
// gets one grade-2 qrel pointing at its source passage.
inline SynthData synth_corpus(uint64_t seed, size_t n_passages, size_t n_queries) {
    using namespace rankinject;
    SynthData data;
    for (size_t i = 0; i < n_passages; ++i) {
        Rng rng = stream(seed, "synth/passage/" + std::to_string(i));
        Passage p;
        p.id = "d" + std::to_string(i);
        p.text = synth_passage(rng);
        p.source = "synth";
        data.store.add(std::move(p));
    }
    data.eval.min_grade = 1;
    for (size_t i = 0; i < n_queries && i < n_passages; ++i) {
        Rng rng = stream(seed, "synth/query/" + std::to_string(i));
        const auto toks = tokenize(data.store[i].text);
        std::string a = to_lower(toks[1]);                            // first noun
        std::string b = to_lower(toks[rng.bounded(toks.size())]);
        Query q;
        q.id = "q" + std::to_string(i);
        q.text = "what is the " + a + " of the " + b;
        data.eval.queries.push_back(q);
        data.eval.qrels.add({q.id, data.store[i].id, 2});
    }
    return data;
}

}  // namespace testsupport
