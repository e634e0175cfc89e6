#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "loopcheck/chat.hpp"
#include "loopcheck/eval.hpp"

namespace loopcheck::sim {

struct UnrecognizedQuestion : std::runtime_error {
    explicit UnrecognizedQuestion(const std::string& q)
        : std::runtime_error("simulator cannot answer: \"" + q + "\"") {}
};

struct VocabTooSmall : std::runtime_error {
    explicit VocabTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct SceneObject {
    std::string name;                     // normalized noun
    std::vector<std::string> attributes;  // "is yellow", "has a handle", ...
    double salience = 1.0;
};

struct SceneGraph {
    std::string image_id;
    std::vector<SceneObject> objects;

    const SceneObject* find(const std::string& normalized_name) const;
    bool contains(const std::string& name) const;
    std::vector<std::string> object_names() const;
};

nlohmann::json to_json(const SceneGraph& scene);
SceneGraph scene_from_json(const nlohmann::json& j);
std::vector<SceneGraph> load_scenes(const std::filesystem::path& path);
void save_scenes(const std::vector<SceneGraph>& scenes, const std::filesystem::path& path);

/// Controls how the simulator lies. Absent objects get affirmed with
/// p_assert_absent; their described attributes are borrowed from another
/// scene object with p_borrow, otherwise drawn from the fabricated pool
/// (which must stay disjoint from every scene attribute).
struct HallucinationProfile {
    double p_assert_absent = 0.5;
    double p_borrow = 0.7;
    std::vector<std::string> fabricated_pool;
    std::vector<std::string> distractor_vocab;  // absent objects a caption may invent
    uint64_t rng_seed = 0;
};

HallucinationProfile profile_from_json(const nlohmann::json& j);

struct ExistenceQuestion { std::string object; };
struct DescribeQuestion { std::string object; };
struct CoverageQuestion { std::string attribute; bool all_objects; };
struct CaptionQuestion {};

using ParsedQuestion =
    std::variant<ExistenceQuestion, DescribeQuestion, CoverageQuestion, CaptionQuestion>;

/// Recognizes the four question shapes the pipeline emits; throws
/// UnrecognizedQuestion on drift.
ParsedQuestion parse_question(const std::string& question);

/// Pure function of (scene, profile, question, seed): same inputs, same
/// text. Coverage answers list exactly the true possessors, in salience
/// order, and never a hallucinated object.
std::string answer(const SceneGraph& scene, const HallucinationProfile& profile,
                   const std::string& question, const chat::SamplingParams& params);

/// Oracle label for a binary existence question.
bool ground_truth(const SceneGraph& scene, const std::string& question);

/// ChatBackend adapter over one scene.
class SimulatorBackend : public chat::ChatBackend {
public:
    SimulatorBackend(SceneGraph scene, HallucinationProfile profile);

    chat::ChatResult chat(const std::vector<chat::ChatMessage>& messages,
                          const chat::SamplingParams& params) override;

    std::string id() const override { return "simulator:" + scene_.image_id; }

    const SceneGraph& scene() const { return scene_; }
    const HallucinationProfile& profile() const { return profile_; }

private:
    SceneGraph scene_;
    HallucinationProfile profile_;
};

/// Generation vocabulary: nouns plus attribute pools, loaded from the
/// data files. Attribute phrases must not contain any vocabulary noun,
/// or coverage answers could leak false loop closures.
struct Vocab {
    std::vector<std::string> nouns;
    std::vector<std::string> attribute_pool;
    std::vector<std::string> fabricated_pool;
};

Vocab load_vocab(const std::filesystem::path& path);

using CooccurrenceTable = std::map<std::string, std::vector<std::string>>;
CooccurrenceTable load_cooccurrence(const std::filesystem::path& path);

struct FixtureSet {
    std::vector<SceneGraph> scenes;
    std::vector<eval::EvalRecord> random_records;
    std::vector<eval::EvalRecord> popular_records;
    std::vector<eval::EvalRecord> adversarial_records;
};

/// Deterministic under seed. Each image gets questions_per_image records
/// per setting, half positive, half negative; negatives follow the
/// setting's sampling rule.
FixtureSet generate_fixtures(int n_scenes, int objects_per_scene, int questions_per_image,
                             const Vocab& vocab, const CooccurrenceTable& cooccurrence,
                             uint64_t seed);

/// Existence pairs: one positive and one negative question per image.
std::vector<eval::EvalRecord> generate_mme_records(const std::vector<SceneGraph>& scenes,
                                                   const Vocab& vocab, uint64_t seed);

std::string existence_question(const std::string& noun);

}  // namespace loopcheck::sim
