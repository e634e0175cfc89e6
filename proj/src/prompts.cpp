#include "loopcheck/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "loopcheck/sha256.hpp"

namespace loopcheck::prompts {

namespace {

const char* kNames[kTemplateCount] = {
    "object_extraction",         "describe_object",
    "attribute_extraction",      "question_formulation_full",
    "question_formulation_simple", "loop_check",
    "refinement",
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ManifestError("cannot open template file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Collapses the "is/has" marker against the verb the attribute brought
// with it: "What is/has is red ..." -> "What is red ...".
std::string normalize_is_has(std::string text) {
    const std::string marker = "is/has ";
    size_t pos = text.find(marker);
    if (pos == std::string::npos) return text;
    size_t word_begin = pos + marker.size();
    size_t word_end = word_begin;
    while (word_end < text.size() &&
           std::isalpha(static_cast<unsigned char>(text[word_end])))
        ++word_end;
    std::string next = text.substr(word_begin, word_end - word_begin);
    if (next == "is" || next == "are" || next == "has" || next == "have")
        text.erase(pos, marker.size());
    return text;
}

}  // namespace

const char* to_string(TemplateId id) { return kNames[int(id)]; }

TemplateId template_id_from_string(const std::string& name) {
    for (int i = 0; i < kTemplateCount; ++i) {
        if (name == kNames[i]) return TemplateId(i);
    }
    throw UnknownTemplate(name);
}

std::set<std::string> scan_placeholders(const std::string& text) {
    std::set<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '{') {
            ++i;
            continue;
        }
        size_t close = text.find('}', i + 1);
        if (close == std::string::npos) break;
        std::string name = text.substr(i + 1, close - i - 1);
        bool ident = !name.empty();
        for (char c : name) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') ident = false;
        }
        if (ident) out.insert(name);
        i = close + 1;
    }
    return out;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
    std::filesystem::path manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw ManifestError("cannot open manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("malformed manifest: " + std::string(e.what()));
    }

    PromptRegistry reg;
    for (const auto& entry : manifest.at("templates")) {
        PromptTemplate t;
        t.id = template_id_from_string(entry.at("id").get<std::string>());
        t.file = entry.at("file").get<std::string>();
        t.version = entry.at("version").get<int>();
        t.sha256 = entry.at("sha256").get<std::string>();
        t.text = read_file(dir / t.file);
        std::string actual = sha256_hex(t.text);  // hash pins the raw file bytes
        while (!t.text.empty() && (t.text.back() == '\n' || t.text.back() == '\r'))
            t.text.pop_back();
        if (actual != t.sha256) {
            throw ManifestError("template " + t.file + " hash mismatch: manifest pins " +
                                t.sha256 + " but file hashes to " + actual +
                                " (bump the version when changing a template)");
        }
        t.placeholders = scan_placeholders(t.text);
        reg.templates_[t.id] = std::move(t);
    }
    if (reg.templates_.size() != kTemplateCount) {
        throw ManifestError("manifest lists " + std::to_string(reg.templates_.size()) +
                            " templates, expected " + std::to_string(kTemplateCount));
    }
    return reg;
}

const PromptTemplate& PromptRegistry::get(TemplateId id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw UnknownTemplate(to_string(id));
    return it->second;
}

std::vector<PromptTemplate> PromptRegistry::templates() const {
    std::vector<PromptTemplate> out;
    for (const auto& [id, t] : templates_) out.push_back(t);
    return out;
}

std::string PromptRegistry::render(
    TemplateId id, const std::map<std::string, std::string>& bindings) const {
    const PromptTemplate& t = get(id);
    for (const std::string& ph : t.placeholders) {
        auto it = bindings.find(ph);
        if (it == bindings.end() || it->second.empty()) throw MissingBinding(ph);
    }
    // single pass, so braces inside binding values are never re-expanded
    std::string out;
    out.reserve(t.text.size());
    size_t i = 0;
    while (i < t.text.size()) {
        if (t.text[i] == '{') {
            size_t close = t.text.find('}', i + 1);
            if (close != std::string::npos) {
                std::string name = t.text.substr(i + 1, close - i - 1);
                auto it = bindings.find(name);
                if (it != bindings.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(t.text[i]);
        ++i;
    }
    return normalize_is_has(std::move(out));
}

}  // namespace loopcheck::prompts
