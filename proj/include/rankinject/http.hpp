#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rankinject/common.hpp"

namespace rankinject {

/// Remote endpoint description. `api_key_env` names an environment variable;
/// the key itself never appears in configs or outputs.
struct EndpointConfig {
    std::string base_url;      // http(s)://host[:port]
    std::string model;
    std::string api_key_env;   // empty = unauthenticated endpoint
    int retries = 3;           // total attempts per call
    double timeout_s = 60.0;
    double backoff_s = 0.5;    // doubled after each failed attempt
    int concurrency = 8;       // harness-side in-flight request cap

    void validate() const {
        if (!base_url.starts_with("http://") && !base_url.starts_with("https://"))
            throw ConfigError("endpoint URL must start with http:// or https://: " + base_url);
        if (retries < 1) throw ConfigError("retries must be >= 1");
        if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    }
};

/// JSON-over-POST client with bounded retries and exponential backoff.
/// Connection failures, 429s and 5xx replies are retried; other statuses fail
/// immediately. Safe for concurrent use: every call owns its connection.
class HttpJsonClient {
public:
    explicit HttpJsonClient(EndpointConfig config) : config_(std::move(config)) {
        config_.validate();
        if (!config_.api_key_env.empty()) {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (!key || !*key)
                throw ConfigError("credential environment variable not set: " +
                                  config_.api_key_env);
            api_key_ = key;
        }
    }

    const EndpointConfig& config() const { return config_; }

    nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
        const std::string payload = body.dump();
        int last_status = 0;
        std::string last_error;
        for (int attempt = 1; attempt <= config_.retries; ++attempt) {
            if (attempt > 1 && config_.backoff_s > 0) {
                const double delay = config_.backoff_s * static_cast<double>(1 << (attempt - 2));
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            httplib::Client client(config_.base_url);
            const auto timeout = std::chrono::duration<double>(config_.timeout_s);
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = client.Post(path, headers, payload, "application/json");
            if (!res) {
                last_status = 0;
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            last_status = res->status;
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status < 200 || res->status >= 300)
                throw TransportError("HTTP " + std::to_string(res->status) + " from " + path,
                                     res->status);
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                last_error = std::string("bad JSON in reply: ") + e.what();
                continue;
            }
        }
        throw TransportError(path + " failed after " + std::to_string(config_.retries) +
                                 " attempts: " + last_error,
                             last_status);
    }

private:
    EndpointConfig config_;
    std::string api_key_;
};

}  // namespace rankinject
