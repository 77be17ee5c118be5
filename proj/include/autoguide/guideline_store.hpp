// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/context.hpp"
#include "autoguide/error.hpp"
#include "autoguide/parallel.hpp"
#include "autoguide/prompt_template.hpp"
#include "autoguide/roles.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide {

struct Guideline {
    std::string text;
    std::string source_pair;
    std::size_t deviation = 0;
    std::size_t created_at = 0;

    bool operator==(const Guideline&) const = default;
};

struct StoreEntry {
    Context context;
    std::vector<Guideline> guidelines;

    bool operator==(const StoreEntry&) const = default;
};

/// Context-keyed guideline map. Entries keep insertion order; keys are distinct canonical
/// contexts; guideline texts are unique per key; ordinals are unique store-wide.
class GuidelineStore {
public:
    static constexpr int kSchemaVersion = 1;

    GuidelineStore() = default;

    const std::vector<StoreEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    std::size_t guideline_count() const noexcept {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.guidelines.size();
        return n;
    }

    std::vector<Context> contexts() const {
        std::vector<Context> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.context);
        return out;
    }

    const StoreEntry* find(std::string_view canonical_key) const {
        auto it = index_.find(std::string(canonical_key));
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    /// Index of the entry for `context`, creating an empty one when the key is new.
    std::size_t add_context(const Context& context) {
        auto [it, inserted] = index_.try_emplace(context.canonical, entries_.size());
        if (inserted) entries_.push_back({context, {}});
        return it->second;
    }

    /// Appends a guideline unless the entry already holds the same text.
    bool add_guideline(std::size_t entry, std::string text, std::string source_pair, std::size_t deviation) {
        auto& list = entries_.at(entry).guidelines;
        for (const auto& g : list)
            if (g.text == text) return false;
        list.push_back({std::move(text), std::move(source_pair), deviation, next_ordinal_++});
        return true;
    }

    void remove_empty_entries() {
        std::vector<StoreEntry> kept;
        for (auto& e : entries_)
            if (!e.guidelines.empty()) kept.push_back(std::move(e));
        entries_ = std::move(kept);
        reindex();
    }

    /// Rebuilds a store from raw entries, enforcing every store invariant.
    static GuidelineStore from_entries(std::vector<StoreEntry> entries) {
        GuidelineStore store;
        store.entries_ = std::move(entries);
        store.reindex();
        if (store.index_.size() != store.entries_.size()) throw FormatError("store has duplicate context keys");
        std::map<std::size_t, bool> ordinals;
        for (const auto& e : store.entries_) {
            std::map<std::string, bool> texts;
            for (const auto& g : e.guidelines) {
                if (text::trim(g.text).empty()) throw FormatError("store holds an empty guideline");
                if (!texts.emplace(g.text, true).second)
                    throw FormatError("duplicate guideline under key '" + e.context.canonical + "'");
                if (!ordinals.emplace(g.created_at, true).second)
                    throw FormatError("duplicate guideline ordinal " + std::to_string(g.created_at));
                store.next_ordinal_ = std::max(store.next_ordinal_, g.created_at + 1);
            }
        }
        return store;
    }

    bool operator==(const GuidelineStore& other) const { return entries_ == other.entries_; }

private:
    void reindex() {
        index_.clear();
        for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].context.canonical, i);
    }

    std::vector<StoreEntry> entries_;
    std::map<std::string, std::size_t> index_;
    std::size_t next_ordinal_ = 0;
};

// ---------------------------------------------------------------------------
// Persistence: {"version": 1, "entries": [{"context_raw", "context_key",
//   "guidelines": [{"text", "source_pair", "deviation", "created_at"}]}]}

inline nlohmann::json to_json(const GuidelineStore& store) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : store.entries()) {
        nlohmann::json gs = nlohmann::json::array();
        for (const auto& g : e.guidelines)
            gs.push_back({{"text", g.text},
                          {"source_pair", g.source_pair},
                          {"deviation", g.deviation},
                          {"created_at", g.created_at}});
        entries.push_back({{"context_raw", e.context.raw}, {"context_key", e.context.canonical}, {"guidelines", gs}});
    }
    return {{"version", GuidelineStore::kSchemaVersion}, {"entries", std::move(entries)}};
}

inline GuidelineStore store_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("version")) throw FormatError("store file has no version field");
    const auto& v = j.at("version");
    if (!v.is_number_integer() || v.get<long long>() != GuidelineStore::kSchemaVersion)
        throw SchemaVersionMismatch("store schema version " + v.dump() + " is not supported (expected " +
                                    std::to_string(GuidelineStore::kSchemaVersion) + ")");
    try {
        std::vector<StoreEntry> entries;
        for (const auto& je : j.at("entries")) {
            StoreEntry e;
            e.context.raw = je.at("context_raw").get<std::string>();
            e.context.canonical = je.at("context_key").get<std::string>();
            if (e.context.canonical != text::canonicalize(e.context.raw))
                throw FormatError("context_key does not match context_raw for '" + e.context.raw + "'");
            for (const auto& jg : je.at("guidelines"))
                e.guidelines.push_back({jg.at("text").get<std::string>(), jg.at("source_pair").get<std::string>(),
                                        jg.at("deviation").get<std::size_t>(), jg.at("created_at").get<std::size_t>()});
            entries.push_back(std::move(e));
        }
        return GuidelineStore::from_entries(std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed store file: ") + e.what());
    }
}

inline void save(const GuidelineStore& store, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write store " + path.string());
    out << to_json(store).dump(2) << '\n';
    if (!out) throw IoError("write failed for store " + path.string());
}

inline GuidelineStore load_store(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open store " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return store_from_json(j);
}

/// Human-readable listing used by `store inspect`.
inline std::string inspect(const GuidelineStore& store) {
    std::string out = "contexts: " + std::to_string(store.size()) +
                      ", guidelines: " + std::to_string(store.guideline_count()) + "\n";
    std::size_t i = 0;
    for (const auto& e : store.entries()) {
        out += "\n[" + std::to_string(++i) + "] " + e.context.raw + "\n";
        out += "    key: " + e.context.canonical + "\n";
        for (const auto& g : e.guidelines)
            out += "    #" + std::to_string(g.created_at) + " (" + g.source_pair + ", t=" + std::to_string(g.deviation) +
                   ") " + g.text + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Guideline extraction and store construction

/// Asks the extraction-role model for the guideline that explains the pair's deviation.
inline Guideline extract_guideline(const ContrastivePair& pair, const Context& context, const TemplateSet& templates,
                                   LanguageModel& lm, const std::string& model, int max_tokens = 256) {
    auto prompt = templates.extraction.render({{"positive_trajectory", render_trajectory(pair.positive)},
                                               {"negative_trajectory", render_trajectory(pair.negative)},
                                               {"context", context.raw}});
    auto paragraph = text::first_paragraph(ask(lm, model, std::move(prompt), max_tokens));
    if (paragraph.empty()) throw EmptyGuideline("extraction model returned no guideline for pair " + pair.id);
    return {std::move(paragraph), pair.id, pair.deviation, 0};
}

struct BuildOptions {
    MatchMode match_mode = MatchMode::lm;
    std::size_t jobs = 1;
    std::function<void(std::string_view)> log;
};

struct PairOutcome {
    std::string pair_id;
    std::optional<Context> identified;
    std::optional<std::string> key;  // canonical key the pair was filed under
    bool inserted = false;           // false for failures and exact duplicates
    std::string error;
};

struct BuildResult {
    GuidelineStore store;
    std::vector<PairOutcome> outcomes;

    std::size_t failures() const {
        std::size_t n = 0;
        for (const auto& o : outcomes) n += o.error.empty() ? 0 : 1;
        return n;
    }
};

/// Builds the context-keyed guideline store from contrastive pairs.
///
/// Per pair, in order: identify the context of the shared prefix (pair.deviation cut of
/// the positive trajectory), match it against the contexts filed so far (reusing the
/// existing one on a match), extract a guideline for the matched context and insert it
/// with exact-text dedup. Identification and extraction fan out over `jobs` threads;
/// matching and insertion run in pair order so the result is independent of `jobs`.
/// Failing pairs are logged and skipped; ExtractionFailed is raised only if every pair fails.
inline BuildResult build_store(const std::vector<ContrastivePair>& pairs, const TemplateSet& templates,
                               const LmRoles& roles, const BuildOptions& options = {}) {
    const auto n = pairs.size();
    BuildResult result;
    result.outcomes.resize(n);
    std::vector<std::optional<Context>> filed(n);
    std::vector<std::optional<Guideline>> extracted(n);

    std::mutex log_mu;
    auto fail = [&](std::size_t i, const std::exception& e) {
        result.outcomes[i].error = e.what();
        if (!options.log) return;
        std::lock_guard lock(log_mu);
        options.log("skipping pair " + pairs[i].id + ": " + e.what());
    };

    parallel_for(n, options.jobs, [&](std::size_t i) {
        result.outcomes[i].pair_id = pairs[i].id;
        try {
            result.outcomes[i].identified = identify_context(prefix(pairs[i].positive, pairs[i].deviation), templates,
                                                             *roles.context, roles.models.context);
        } catch (const Error& e) {
            fail(i, e);
        }
    });

    // Matching depends on the keys created by earlier pairs.
    for (std::size_t i = 0; i < n; ++i) {
        if (!result.outcomes[i].identified) continue;
        const auto& candidate = *result.outcomes[i].identified;
        try {
            auto existing = result.store.contexts();
            auto idx = match_context_index(candidate, existing, roles.matching.get(), roles.models.matching, templates,
                                           options.match_mode);
            const auto entry = idx ? *idx : result.store.add_context(candidate);
            filed[i] = result.store.entries()[entry].context;
            result.outcomes[i].key = filed[i]->canonical;
        } catch (const Error& e) {
            fail(i, e);
        }
    }

    parallel_for(n, options.jobs, [&](std::size_t i) {
        if (!filed[i]) return;
        try {
            extracted[i] = extract_guideline(pairs[i], *filed[i], templates, *roles.extraction, roles.models.extraction);
        } catch (const Error& e) {
            fail(i, e);
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (!extracted[i]) continue;
        auto entry = result.store.add_context(*filed[i]);
        result.outcomes[i].inserted =
            result.store.add_guideline(entry, extracted[i]->text, extracted[i]->source_pair, extracted[i]->deviation);
    }
    // Keys whose every pair failed during extraction carry no guideline.
    result.store.remove_empty_entries();

    if (n > 0 && result.failures() == n) throw ExtractionFailed("all " + std::to_string(n) + " pairs failed");
    return result;
}

}  // namespace autoguide
