// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "autoguide/error.hpp"

namespace autoguide {

/// Text with "{{slot}}" placeholders. Every declared slot must occur exactly once and
/// no undeclared placeholder may occur.
class PromptTemplate {
public:
    PromptTemplate() = default;

    PromptTemplate(std::string name, std::string body, std::vector<std::string> slots)
        : name_(std::move(name)), body_(std::move(body)), slots_(std::move(slots)) {
        std::map<std::string, int> seen;
        for (const auto& p : placeholders(body_)) ++seen[p];
        for (const auto& s : slots_) {
            auto it = seen.find(s);
            int n = it == seen.end() ? 0 : it->second;
            if (n != 1)
                throw TemplateError("template '" + name_ + "': slot {{" + s + "}} occurs " + std::to_string(n) +
                                    " times, expected exactly once");
        }
        for (const auto& [p, n] : seen) {
            if (std::find(slots_.begin(), slots_.end(), p) == slots_.end())
                throw TemplateError("template '" + name_ + "': undeclared slot {{" + p + "}}");
        }
    }

    /// Single pass: substituted values are never re-expanded.
    std::string render(const std::map<std::string, std::string>& values) const {
        std::string out;
        out.reserve(body_.size() + 256);
        std::size_t pos = 0;
        while (true) {
            auto open = body_.find("{{", pos);
            if (open == std::string::npos) break;
            auto close = body_.find("}}", open + 2);
            if (close == std::string::npos) break;
            out.append(body_, pos, open - pos);
            auto key = body_.substr(open + 2, close - open - 2);
            auto it = values.find(key);
            if (it == values.end()) throw TemplateError("template '" + name_ + "': no value for slot {{" + key + "}}");
            out.append(it->second);
            pos = close + 2;
        }
        out.append(body_, pos, std::string::npos);
        return out;
    }

    const std::string& name() const noexcept { return name_; }
    const std::string& body() const noexcept { return body_; }
    const std::vector<std::string>& slots() const noexcept { return slots_; }

    static std::vector<std::string> placeholders(std::string_view body) {
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (true) {
            auto open = body.find("{{", pos);
            if (open == std::string_view::npos) break;
            auto close = body.find("}}", open + 2);
            if (close == std::string_view::npos) break;
            out.emplace_back(body.substr(open + 2, close - open - 2));
            pos = close + 2;
        }
        return out;
    }

private:
    std::string name_;
    std::string body_;
    std::vector<std::string> slots_;
};

namespace templates {

inline constexpr std::string_view kIdentificationBody =
    R"(You observe an agent acting in a text-based environment.
Describe the agent's current context in one concise sentence: where the agent is and
what it is currently facing. Do not suggest an action.

{{few_shot_examples}}

Interaction so far:
{{partial_trajectory}}

Context:)";

inline constexpr std::string_view kMatchingBody =
    R"(You maintain a list of distinct situations an agent can be in.
Decide whether the new context describes the same situation as one of the existing contexts.

Existing contexts:
{{existing_contexts}}

New context: {{candidate_context}}

If the new context matches an existing context, answer with that context's number only.
If it matches none of them, answer NONE.
Answer:)";

inline constexpr std::string_view kExtractionBody =
    R"(Two attempts at the same task are shown. They share the same beginning and then take
different actions; the first attempt obtained the higher return.

Higher-return attempt:
{{positive_trajectory}}

Lower-return attempt:
{{negative_trajectory}}

Context of the deviation: {{context}}

Write one concise guideline that would help an agent in this context choose the better
action. Use the form "When <context>, ... you should <action>." Reply with the guideline only.
Guideline:)";

inline constexpr std::string_view kSelectionBody =
    R"(An agent is working on a task and may consult guidelines learned from past experience.

Current trajectory:
{{trajectory}}

Current context: {{context}}

Candidate guidelines:
{{guidelines}}

Select the {{k}} guidelines most relevant to the agent's next action. Answer with their
numbers separated by spaces, most relevant first.
Answer:)";

inline constexpr std::string_view kDefaultIdentificationExamples =
    R"(Example:
Interaction so far:
Task: buy a bottle of olive oil
Observation: The store entrance. Aisles ahead: produce, pantry.
Action: walk to the pantry aisle
Observation: The pantry aisle. Shelves hold oils, vinegar and flour.

Context: In the pantry aisle, facing the shelf of oils)";

}  // namespace templates

struct TemplateSet {
    PromptTemplate identification;
    PromptTemplate matching;
    PromptTemplate extraction;
    PromptTemplate selection;
    std::string identification_examples;

    static TemplateSet defaults() {
        return {PromptTemplate("identification", std::string(templates::kIdentificationBody),
                               {"few_shot_examples", "partial_trajectory"}),
                PromptTemplate("matching", std::string(templates::kMatchingBody),
                               {"existing_contexts", "candidate_context"}),
                PromptTemplate("extraction", std::string(templates::kExtractionBody),
                               {"positive_trajectory", "negative_trajectory", "context"}),
                PromptTemplate("selection", std::string(templates::kSelectionBody),
                               {"trajectory", "context", "guidelines", "k"}),
                std::string(templates::kDefaultIdentificationExamples)};
    }
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Loads identification.txt, matching.txt, extraction.txt, selection.txt and
/// identification_examples.txt from `dir`. A single trailing newline is dropped.
inline TemplateSet load_templates(const std::filesystem::path& dir) {
    auto read = [&](const char* file) {
        auto body = read_text_file(dir / file);
        if (!body.empty() && body.back() == '\n') body.pop_back();
        return body;
    };
    auto set = TemplateSet::defaults();
    set.identification = PromptTemplate("identification", read("identification.txt"), set.identification.slots());
    set.matching = PromptTemplate("matching", read("matching.txt"), set.matching.slots());
    set.extraction = PromptTemplate("extraction", read("extraction.txt"), set.extraction.slots());
    set.selection = PromptTemplate("selection", read("selection.txt"), set.selection.slots());
    set.identification_examples = read("identification_examples.txt");
    return set;
}

}  // namespace autoguide
