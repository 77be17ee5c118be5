// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "autoguide/error.hpp"
#include "autoguide/text.hpp"

namespace autoguide {

enum class ChatRole { system, user, assistant };

inline std::string_view to_string(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "user";
}

inline ChatRole parse_chat_role(std::string_view s) {
    if (s == "system") return ChatRole::system;
    if (s == "user") return ChatRole::user;
    if (s == "assistant") return ChatRole::assistant;
    throw FormatError("unknown chat role '" + std::string(s) + "'");
}

struct ChatMessage {
    ChatRole role = ChatRole::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 256;
    std::optional<std::vector<std::string>> stop;

    bool operator==(const ChatRequest&) const = default;
};

enum class BackendKind { http, scripted, replay };

inline std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::http: return "http";
        case BackendKind::scripted: return "scripted";
        case BackendKind::replay: return "replay";
    }
    return "http";
}

inline BackendKind parse_backend_kind(std::string_view s) {
    if (s == "http") return BackendKind::http;
    if (s == "scripted") return BackendKind::scripted;
    if (s == "replay") return BackendKind::replay;
    throw ConfigError("unknown backend '" + std::string(s) + "'");
}

struct ChatResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    BackendKind backend = BackendKind::scripted;

    bool operator==(const ChatResponse&) const = default;
};

/// Throws ConfigError when the request breaks the ChatRequest invariants.
inline void validate(const ChatRequest& req) {
    if (req.messages.empty()) throw ConfigError("chat request has no messages");
    if (req.messages.front().role == ChatRole::assistant)
        throw ConfigError("chat request must start with a system or user message");
    for (const auto& m : req.messages)
        if (m.role != ChatRole::assistant && text::trim(m.content).empty())
            throw ConfigError("system/user message content must be nonempty");
    if (!(req.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (req.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

inline nlohmann::json to_json(const ChatRequest& req) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    nlohmann::json j = {{"model", req.model},
                        {"messages", std::move(messages)},
                        {"temperature", req.temperature},
                        {"max_tokens", req.max_tokens}};
    if (req.stop) j["stop"] = *req.stop;
    return j;
}

inline ChatRequest chat_request_from_json(const nlohmann::json& j) {
    ChatRequest req;
    req.model = j.at("model").get<std::string>();
    for (const auto& m : j.at("messages"))
        req.messages.push_back({parse_chat_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    req.temperature = j.at("temperature").get<double>();
    req.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("stop")) req.stop = j.at("stop").get<std::vector<std::string>>();
    return req;
}

inline nlohmann::json to_json(const ChatResponse& resp) {
    return {{"text", resp.text},
            {"prompt_tokens", resp.prompt_tokens},
            {"completion_tokens", resp.completion_tokens},
            {"backend", std::string(to_string(resp.backend))}};
}

inline ChatResponse chat_response_from_json(const nlohmann::json& j) {
    ChatResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.prompt_tokens = j.value("prompt_tokens", 0);
    resp.completion_tokens = j.value("completion_tokens", 0);
    resp.backend = parse_backend_kind(j.value("backend", std::string("http")));
    return resp;
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex.append(buf, 2);
    }
    return hex;
}

/// Canonical serialization of the fingerprinted request fields (sorted keys, compact).
inline std::string canonical_request(const ChatRequest& req) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"content", m.content}, {"role", std::string(to_string(m.role))}});
    nlohmann::json j = {{"model", req.model},
                        {"messages", std::move(messages)},
                        {"temperature", req.temperature},
                        {"max_tokens", req.max_tokens}};
    return j.dump();
}

/// Stable hash of model, messages, temperature and max_tokens.
inline std::string fingerprint(const ChatRequest& req) { return sha256_hex(canonical_request(req)); }

inline int approx_token_count(std::string_view s) {
    int n = 0;
    bool in_word = false;
    for (char c : s) {
        bool space = text::is_space(c);
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

/// Uniform chat-completion interface; implementations must tolerate concurrent calls.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

using LanguageModelPtr = std::shared_ptr<LanguageModel>;

/// Sends a single-user-message request and returns the response text.
inline std::string ask(LanguageModel& lm, const std::string& model, std::string prompt, int max_tokens,
                       double temperature = 0.0) {
    ChatRequest req;
    req.model = model;
    req.messages.push_back({ChatRole::user, std::move(prompt)});
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    return lm.complete(req).text;
}

struct ScriptRule {
    enum class Match { substring, regex };
    enum class Occurrence { first, last };

    std::string pattern;
    // For regex rules, "$1"-style references are expanded from the selected match.
    std::string response;
    Match match = Match::substring;
    Occurrence occurrence = Occurrence::first;
};

/// Deterministic rule-table stand-in for a language model.
///
/// Rules are tried in order against the content of the final user message; the first
/// matching rule produces the response. Without a match the default response is used,
/// or ScriptedNoMatch is thrown when none is configured.
class ScriptedBackend final : public LanguageModel {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules, std::optional<std::string> default_response = std::nullopt)
        : rules_(std::move(rules)), default_(std::move(default_response)) {
        compiled_.reserve(rules_.size());
        for (const auto& r : rules_) {
            if (r.match == ScriptRule::Match::regex) {
                try {
                    compiled_.emplace_back(std::regex(r.pattern, std::regex::ECMAScript));
                } catch (const std::regex_error& e) {
                    throw ConfigError("invalid scripted regex '" + r.pattern + "': " + e.what());
                }
            } else {
                compiled_.emplace_back(std::nullopt);
            }
        }
    }

    ChatResponse complete(const ChatRequest& request) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        std::string_view target;
        for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
            if (it->role == ChatRole::user) {
                target = it->content;
                break;
            }
        }
        auto reply = [&](std::string text) {
            int prompt_tokens = 0;
            for (const auto& m : request.messages) prompt_tokens += approx_token_count(m.content);
            int completion_tokens = approx_token_count(text);
            return ChatResponse{std::move(text), prompt_tokens, completion_tokens, BackendKind::scripted};
        };
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& rule = rules_[i];
            if (rule.match == ScriptRule::Match::substring) {
                if (target.find(rule.pattern) != std::string_view::npos) return reply(rule.response);
                continue;
            }
            const std::regex& re = *compiled_[i];
            std::match_results<std::string_view::const_iterator> selected;
            bool found = false;
            for (std::regex_iterator<std::string_view::const_iterator> it(target.begin(), target.end(), re), end;
                 it != end; ++it) {
                selected = *it;
                found = true;
                if (rule.occurrence == ScriptRule::Occurrence::first) break;
            }
            if (found) return reply(selected.format(rule.response));
        }
        if (default_) return reply(*default_);
        throw ScriptedNoMatch("no scripted rule matched and no default is configured");
    }

    std::size_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }

private:
    std::vector<ScriptRule> rules_;
    std::vector<std::optional<std::regex>> compiled_;
    std::optional<std::string> default_;
    std::atomic<std::size_t> calls_{0};
};

/// JSON form: {"rules": [{"pattern", "response", "match": "substring"|"regex",
/// "occurrence": "first"|"last"}], "default": "..."?}
inline std::shared_ptr<ScriptedBackend> scripted_from_json(const nlohmann::json& j) {
    try {
        std::vector<ScriptRule> rules;
        for (const auto& r : j.value("rules", nlohmann::json::array())) {
            ScriptRule rule;
            rule.pattern = r.at("pattern").get<std::string>();
            rule.response = r.at("response").get<std::string>();
            const auto match = r.value("match", std::string("substring"));
            if (match == "regex")
                rule.match = ScriptRule::Match::regex;
            else if (match != "substring")
                throw ConfigError("unknown scripted match kind '" + match + "'");
            const auto occ = r.value("occurrence", std::string("first"));
            if (occ == "last")
                rule.occurrence = ScriptRule::Occurrence::last;
            else if (occ != "first")
                throw ConfigError("unknown scripted occurrence '" + occ + "'");
            rules.push_back(std::move(rule));
        }
        std::optional<std::string> fallback;
        if (j.contains("default") && !j.at("default").is_null()) fallback = j.at("default").get<std::string>();
        return std::make_shared<ScriptedBackend>(std::move(rules), std::move(fallback));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed scripted backend: ") + e.what());
    }
}

inline nlohmann::json to_json(const std::vector<ScriptRule>& rules, const std::optional<std::string>& fallback) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rules) {
        nlohmann::json jr = {{"pattern", r.pattern}, {"response", r.response}};
        if (r.match == ScriptRule::Match::regex) jr["match"] = "regex";
        if (r.occurrence == ScriptRule::Occurrence::last) jr["occurrence"] = "last";
        arr.push_back(std::move(jr));
    }
    nlohmann::json j = {{"rules", std::move(arr)}};
    if (fallback) j["default"] = *fallback;
    return j;
}

/// Forwards to an inner model and counts calls.
class CountingBackend final : public LanguageModel {
public:
    explicit CountingBackend(LanguageModelPtr inner) : inner_(std::move(inner)) {}

    ChatResponse complete(const ChatRequest& request) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_->complete(request);
    }

    std::size_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }

private:
    LanguageModelPtr inner_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace autoguide
