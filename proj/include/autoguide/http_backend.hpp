// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/lm.hpp"

namespace autoguide {

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_delay{1000};
    double multiplier = 2.0;

    std::chrono::milliseconds delay_for(int retry) const {
        double d = static_cast<double>(initial_delay.count());
        for (int i = 0; i < retry; ++i) d *= multiplier;
        return std::chrono::milliseconds(static_cast<long long>(d));
    }
};

inline bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

struct HttpBackendOptions {
    std::string base_url;
    std::string api_key;
    RetryPolicy retry;
    std::chrono::seconds timeout{120};
    // Replaceable for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;

    /// Reads AUTOGUIDE_BASE_URL and AUTOGUIDE_API_KEY.
    static HttpBackendOptions from_env() {
        HttpBackendOptions o;
        if (const char* url = std::getenv("AUTOGUIDE_BASE_URL")) o.base_url = url;
        if (const char* key = std::getenv("AUTOGUIDE_API_KEY")) o.api_key = key;
        return o;
    }
};

/// OpenAI-compatible chat-completions client: POST {base_url}/v1/chat/completions.
class HttpBackend final : public LanguageModel {
public:
    explicit HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
        if (options_.base_url.empty()) throw ConfigError("HTTP backend needs a base URL (AUTOGUIDE_BASE_URL)");
        if (options_.api_key.empty()) throw ConfigError("HTTP backend needs an API key (AUTOGUIDE_API_KEY)");
        split_base_url();
        if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }

    ChatResponse complete(const ChatRequest& request) override {
        validate(request);
        const auto body = to_json(request).dump();
        for (int attempt = 0;; ++attempt) {
            httplib::Client client(origin_);
            client.set_connection_timeout(options_.timeout);
            client.set_read_timeout(options_.timeout);
            client.set_bearer_token_auth(options_.api_key);
            auto res = client.Post(path_, body, "application/json");

            int status = 0;
            std::string err_body;
            if (!res) {
                err_body = "transport error: " + httplib::to_string(res.error());
            } else if (res->status == 200) {
                return parse_response(res->body);
            } else {
                status = res->status;
                err_body = res->body;
            }
            const bool retryable = status == 0 || is_retryable_status(status);
            if (!retryable || attempt >= options_.retry.max_retries) throw HttpError(status, err_body);
            options_.sleep(options_.retry.delay_for(attempt));
        }
    }

    const std::string& origin() const noexcept { return origin_; }
    const std::string& path() const noexcept { return path_; }

private:
    void split_base_url() {
        std::string url = options_.base_url;
        while (!url.empty() && url.back() == '/') url.pop_back();
        const auto scheme_end = url.find("://");
        const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        origin_ = url.substr(0, path_start);
        std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
        path_ = prefix + "/v1/chat/completions";
    }

    static ChatResponse parse_response(const std::string& body) {
        try {
            auto j = nlohmann::json::parse(body);
            ChatResponse resp;
            const auto& content = j.at("choices").at(0).at("message").at("content");
            resp.text = content.is_null() ? std::string{} : content.get<std::string>();
            if (j.contains("usage")) {
                resp.prompt_tokens = j["usage"].value("prompt_tokens", 0);
                resp.completion_tokens = j["usage"].value("completion_tokens", 0);
            }
            resp.backend = BackendKind::http;
            return resp;
        } catch (const nlohmann::json::exception& e) {
            throw HttpError(200, std::string("unparsable completion body: ") + e.what());
        }
    }

    HttpBackendOptions options_;
    std::string origin_;
    std::string path_;
};

}  // namespace autoguide
