// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Record/replay of language-model exchanges. A cassette is a JSON-lines file of
//   {"fingerprint": sha256-hex, "request": ChatRequest, "response": ChatResponse}

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/lm.hpp"

namespace autoguide {

struct CassetteEntry {
    ChatRequest request;
    ChatResponse response;
};

class Cassette {
public:
    Cassette() = default;

    /// Loads and verifies every entry; a stored request whose recomputed fingerprint
    /// differs from the stored one raises CassetteMismatch.
    static Cassette load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open cassette " + path.string());
        Cassette cassette;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            const auto where = path.string() + ":" + std::to_string(lineno);
            CassetteEntry entry;
            std::string stored;
            try {
                auto j = nlohmann::json::parse(line);
                stored = j.at("fingerprint").get<std::string>();
                entry.request = chat_request_from_json(j.at("request"));
                entry.response = chat_response_from_json(j.at("response"));
            } catch (const nlohmann::json::exception& e) {
                throw FormatError(where + ": malformed cassette entry: " + e.what());
            }
            if (fingerprint(entry.request) != stored)
                throw CassetteMismatch(where + ": stored request does not hash to its fingerprint " + stored);
            cassette.insert(stored, std::move(entry));
        }
        return cassette;
    }

    /// First recording of a fingerprint wins.
    void insert(const std::string& fp, CassetteEntry entry) { entries_.try_emplace(fp, std::move(entry)); }

    const CassetteEntry* find(const std::string& fp) const {
        auto it = entries_.find(fp);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, CassetteEntry> entries_;
};

class ReplayBackend final : public LanguageModel {
public:
    explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}
    explicit ReplayBackend(const std::filesystem::path& path) : cassette_(Cassette::load(path)) {}

    ChatResponse complete(const ChatRequest& request) override {
        const auto fp = fingerprint(request);
        const auto* entry = cassette_.find(fp);
        if (!entry) throw ReplayMiss("no recorded response for request " + fp);
        if (canonical_request(entry->request) != canonical_request(request))
            throw CassetteMismatch("fingerprint collision or tampered entry for " + fp);
        auto resp = entry->response;
        resp.backend = BackendKind::replay;
        return resp;
    }

    const Cassette& cassette() const noexcept { return cassette_; }

private:
    Cassette cassette_;
};

/// Serialized appender shared by every recording wrapper of a run.
class CassetteWriter {
public:
    explicit CassetteWriter(const std::filesystem::path& path) : path_(path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary | std::ios::app);
        if (!out_) throw IoError("cannot open cassette for writing " + path.string());
    }

    void append(const ChatRequest& request, const ChatResponse& response) {
        nlohmann::json j = {{"fingerprint", fingerprint(request)},
                            {"request", to_json(request)},
                            {"response", to_json(response)}};
        std::lock_guard lock(mu_);
        out_ << j.dump() << '\n';
        out_.flush();
        if (!out_) throw IoError("write failed for cassette " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mu_;
};

class RecordingBackend final : public LanguageModel {
public:
    RecordingBackend(LanguageModelPtr inner, std::shared_ptr<CassetteWriter> writer)
        : inner_(std::move(inner)), writer_(std::move(writer)) {}

    ChatResponse complete(const ChatRequest& request) override {
        auto resp = inner_->complete(request);
        writer_->append(request, resp);
        return resp;
    }

private:
    LanguageModelPtr inner_;
    std::shared_ptr<CassetteWriter> writer_;
};

/// Wraps `inner` so every completion is also appended to the cassette at `path`.
inline LanguageModelPtr record_wrap(LanguageModelPtr inner, const std::filesystem::path& path) {
    return std::make_shared<RecordingBackend>(std::move(inner), std::make_shared<CassetteWriter>(path));
}

}  // namespace autoguide
