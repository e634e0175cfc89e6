#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopcheck::prompts {

enum class TemplateId {
    ObjectExtraction,
    DescribeObject,
    AttributeExtraction,
    QuestionFormulationFull,
    QuestionFormulationSimple,
    LoopCheck,
    Refinement,
};

constexpr int kTemplateCount = 7;

const char* to_string(TemplateId id);
TemplateId template_id_from_string(const std::string& name);

struct UnknownTemplate : std::runtime_error {
    explicit UnknownTemplate(const std::string& name)
        : std::runtime_error("unknown template: " + name) {}
};

struct MissingBinding : std::runtime_error {
    explicit MissingBinding(const std::string& placeholder)
        : std::runtime_error("missing or empty binding for placeholder {" + placeholder + "}") {}
};

struct ManifestError : std::runtime_error {
    explicit ManifestError(const std::string& what) : std::runtime_error(what) {}
};

struct PromptTemplate {
    TemplateId id;
    std::string text;
    std::set<std::string> placeholders;
    int version = 1;
    std::string sha256;
    std::string file;
};

/// Loads the seven templates listed in <dir>/manifest.json, verifying the
/// pinned content hash of each file. Immutable after load.
class PromptRegistry {
public:
    static PromptRegistry load(const std::filesystem::path& dir);

    const PromptTemplate& get(TemplateId id) const;

    /// All templates, ordered by TemplateId.
    std::vector<PromptTemplate> templates() const;

    /// Substitutes {name} placeholders. Every placeholder in the template
    /// must have a non-empty binding. Templates carrying the combined
    /// "is/has" marker are normalized against the substituted attribute's
    /// own leading verb.
    std::string render(TemplateId id,
                       const std::map<std::string, std::string>& bindings) const;

private:
    std::map<TemplateId, PromptTemplate> templates_;
};

/// Placeholder names appearing as {name} in the text.
std::set<std::string> scan_placeholders(const std::string& text);

}  // namespace loopcheck::prompts
