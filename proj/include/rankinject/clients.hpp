#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankinject/attackgen.hpp"
#include "rankinject/common.hpp"
#include "rankinject/corpus.hpp"
#include "rankinject/http.hpp"
#include "rankinject/prompts.hpp"
#include "rankinject/scoring.hpp"

// Wire clients for the remote scorer backends. Request bodies are built with
// sorted-key JSON serialization, so identical inputs produce identical bytes.

namespace rankinject {

inline void l2_normalize(std::vector<float>& v) {
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    if (norm <= 0) return;
    const float inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (float& x : v) x *= inv;
}

inline double dot(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

/// POST /v1/embeddings with {"model", "input": [texts]}; replies carry one
/// vector per input, in order. Vectors are unit-normalized on receipt so
/// cosine similarity reduces to a dot product.
class EmbeddingClient {
public:
    explicit EmbeddingClient(EndpointConfig config) : http_(std::move(config)) {}

    const std::string& model() const { return http_.config().model; }
    const EndpointConfig& config() const { return http_.config(); }

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const {
        if (texts.empty()) return {};
        nlohmann::json body{{"model", model()}, {"input", texts}};
        auto reply = http_.post("/v1/embeddings", body);
        if (!reply.contains("data") || !reply["data"].is_array() ||
            reply["data"].size() != texts.size())
            throw TransportError("embedding reply length mismatch: expected " +
                                 std::to_string(texts.size()));
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& item : reply["data"]) {
            std::vector<float> v = item.at("embedding").get<std::vector<float>>();
            l2_normalize(v);
            out.push_back(std::move(v));
        }
        return out;
    }

private:
    HttpJsonClient http_;
};

/// Append-only on-disk embedding cache. Records are keyed by (model id,
/// content hash); all vectors of one model must share a dimension.
///
/// Binary layout per record, little endian:
///   u32 model_len | model bytes | u64 content_hash | u32 dim | dim x f32
class EmbeddingCache {
public:
    static uint64_t content_hash(std::string_view text) { return fnv1a64(text); }

    explicit EmbeddingCache(std::string path) : path_(std::move(path)) { load(); }

    const std::vector<float>* find(const std::string& model, uint64_t hash) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = entries_.find(key(model, hash));
        return it == entries_.end() ? nullptr : &it->second;
    }

    void put(const std::string& model, uint64_t hash, const std::vector<float>& vec) {
        std::lock_guard<std::mutex> lock(mutex_);
        check_dimension(model, vec.size());
        auto [it, inserted] = entries_.emplace(key(model, hash), vec);
        if (!inserted) return;
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        if (!out) throw Error("cannot append to embedding cache: " + path_);
        write_u32(out, static_cast<uint32_t>(model.size()));
        out.write(model.data(), static_cast<std::streamsize>(model.size()));
        write_u64(out, hash);
        write_u32(out, static_cast<uint32_t>(vec.size()));
        out.write(reinterpret_cast<const char*>(vec.data()),
                  static_cast<std::streamsize>(vec.size() * sizeof(float)));
        if (!out) throw Error("embedding cache write failed: " + path_);
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.size();
    }

private:
    static std::string key(const std::string& model, uint64_t hash) {
        return model + '\x1f' + to_hex(hash);
    }

    void check_dimension(const std::string& model, size_t dim) {
        auto [it, inserted] = dims_.emplace(model, dim);
        if (!inserted && it->second != dim)
            throw Error("embedding dimension mismatch for model " + model + ": " +
                        std::to_string(it->second) + " vs " + std::to_string(dim));
    }

    static void write_u32(std::ofstream& out, uint32_t v) {
        char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>(v >> (8 * i));
        out.write(buf, 4);
    }
    static void write_u64(std::ofstream& out, uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(v >> (8 * i));
        out.write(buf, 8);
    }

    void load() {
        std::ifstream in(path_, std::ios::binary);
        if (!in) return;  // cache starts empty
        auto read_u32 = [&](uint32_t& v) {
            char buf[4];
            if (!in.read(buf, 4)) return false;
            v = 0;
            for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[i]);
            return true;
        };
        auto read_u64 = [&](uint64_t& v) {
            char buf[8];
            if (!in.read(buf, 8)) return false;
            v = 0;
            for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[i]);
            return true;
        };
        for (;;) {
            uint32_t model_len = 0;
            if (!read_u32(model_len)) break;
            std::string model(model_len, '\0');
            if (!in.read(model.data(), model_len))
                throw Error("truncated embedding cache: " + path_);
            uint64_t hash = 0;
            uint32_t dim = 0;
            if (!read_u64(hash) || !read_u32(dim))
                throw Error("truncated embedding cache: " + path_);
            std::vector<float> vec(dim);
            if (!in.read(reinterpret_cast<char*>(vec.data()),
                         static_cast<std::streamsize>(dim * sizeof(float))))
                throw Error("truncated embedding cache: " + path_);
            check_dimension(model, dim);
            entries_.emplace(key(model, hash), std::move(vec));
        }
    }

    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::vector<float>> entries_;
    std::unordered_map<std::string, size_t> dims_;
};

/// LLM relevance judge over POST /v1/chat/completions at temperature 0. The
/// reply is parsed as "first integer token wins"; out-of-range integers count
/// as parse failures, and up to two re-asks are issued before giving up.
class JudgeClient {
public:
    JudgeClient(EndpointConfig config, JudgeVariant variant = JudgeVariant::standard)
        : http_(std::move(config)), variant_(variant) {}

    JudgeVariant variant() const { return variant_; }
    const std::string& model() const { return http_.config().model; }
    const EndpointConfig& config() const { return http_.config(); }

    nlohmann::json request_body(std::string_view query, std::string_view passage) const {
        return nlohmann::json{
            {"model", model()},
            {"temperature", 0},
            {"messages", nlohmann::json::array({nlohmann::json{
                             {"role", "user"},
                             {"content", judge_prompt(query, passage, variant_)}}})}};
    }

    static std::optional<int> parse_reply(std::string_view reply) {
        for (const auto& tok : tokenize(reply)) {
            bool digits = !tok.empty();
            size_t start = tok.size() > 1 && (tok[0] == '-' || tok[0] == '+') ? 1 : 0;
            if (start == tok.size()) digits = false;
            for (size_t i = start; i < tok.size() && digits; ++i)
                digits = tok[i] >= '0' && tok[i] <= '9';
            if (!digits) continue;
            const long value = std::stol(tok);
            if (value < 0 || value > 3) return std::nullopt;  // out of range = parse failure
            return static_cast<int>(value);
        }
        return std::nullopt;
    }

    JudgeScore judge(std::string_view query, std::string_view passage) const {
        const auto body = request_body(query, passage);
        std::string last_reply;
        for (int attempt = 0; attempt < 3; ++attempt) {  // initial ask + 2 re-asks
            auto reply = http_.post("/v1/chat/completions", body);
            last_reply = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (auto score = parse_reply(last_reply)) return JudgeScore(*score);
        }
        throw JudgeParseError("judge reply not a score in 0-3 after 3 attempts: \"" + last_reply +
                              "\"");
    }

private:
    HttpJsonClient http_;
    JudgeVariant variant_;
};

/// Pointwise reranker over POST /rerank; the reply's scores align with the
/// input passage order.
class RerankClient {
public:
    explicit RerankClient(EndpointConfig config) : http_(std::move(config)) {}

    const EndpointConfig& config() const { return http_.config(); }

    std::vector<double> rerank(std::string_view query,
                               const std::vector<std::string>& passages) const {
        if (passages.empty()) throw Error("rerank: empty candidate list");
        nlohmann::json body{{"query", std::string(query)}, {"passages", passages}};
        auto reply = http_.post("/rerank", body);
        if (!reply.contains("scores") || !reply["scores"].is_array() ||
            reply["scores"].size() != passages.size())
            throw TransportError("rerank reply length mismatch: expected " +
                                 std::to_string(passages.size()));
        return reply["scores"].get<std::vector<double>>();
    }

private:
    HttpJsonClient http_;
};

/// Text generation at temperature 0, used for LLM-generated relevant passages.
class GenerationClient {
public:
    explicit GenerationClient(EndpointConfig config) : http_(std::move(config)) {}

    std::string complete(std::string_view prompt) const {
        nlohmann::json body{{"model", http_.config().model},
                            {"temperature", 0},
                            {"messages", nlohmann::json::array(
                                             {nlohmann::json{{"role", "user"},
                                                             {"content", std::string(prompt)}}})}};
        auto reply = http_.post("/v1/chat/completions", body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    }

    GeneratedPassage generate(const Query& query, int target_words) const {
        return generate_relevant_passage(
            [this](const std::string& prompt) { return complete(prompt); }, query, target_words);
    }

private:
    HttpJsonClient http_;
};

}  // namespace rankinject
