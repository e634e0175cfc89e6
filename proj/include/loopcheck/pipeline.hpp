#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "loopcheck/chat.hpp"
#include "loopcheck/core.hpp"
#include "loopcheck/eval.hpp"
#include "loopcheck/prompts.hpp"
#include "loopcheck/text.hpp"
#include "loopcheck/transcript.hpp"

namespace loopcheck::sim {
struct SceneGraph;
}

namespace loopcheck::pipe {

enum class QuestionStyle { FullCoverage, Simple };
enum class QuestionKind { Binary, OpenEnded };
enum class HelperMode { Model, RuleBased };

QuestionStyle question_style_from_string(const std::string& s);
const char* to_string(QuestionStyle s);
HelperMode helper_mode_from_string(const std::string& s);
const char* to_string(HelperMode m);

struct HelperFailure : std::runtime_error {
    explicit HelperFailure(const std::string& what) : std::runtime_error(what) {}
};

struct MitigationLeak : std::runtime_error {
    explicit MitigationLeak(const std::string& what) : std::runtime_error(what) {}
};

struct PipelineConfig {
    double lambda_threshold = 0.4;
    int min_attributes = 5;
    int max_describe_rounds = 3;
    QuestionStyle question_style = QuestionStyle::FullCoverage;
    HelperMode helper_mode = HelperMode::RuleBased;
    chat::SamplingParams describe_sampling{1.0, 1, 256, std::nullopt};
    chat::SamplingParams answer_sampling{0.0, 1, 256, std::nullopt};
    int per_object_concurrency = 1;
    bool memoize_verdicts = false;
    std::optional<int64_t> seed;
};

/// Ordered event buffer for one run or one object; sequence numbers are
/// assigned when the run assembles its transcript, so worker scheduling
/// cannot reorder anything.
class EventLog {
public:
    void add_call(const std::string& stage, const std::string& object,
                  const std::vector<chat::ChatMessage>& messages,
                  const std::string& response, const std::string& backend,
                  const chat::ChatResult& result);
    void add_note(const std::string& stage, const std::string& object,
                  const std::string& message);

    const std::vector<store::TranscriptEvent>& events() const { return events_; }
    std::vector<store::TranscriptEvent>& events() { return events_; }

private:
    std::vector<store::TranscriptEvent> events_;
};

/// The helper-LLM role of the method: extraction, masking, judgement and
/// rewriting. The rule-based implementation makes the whole loop runnable
/// without any language model.
class Helper {
public:
    virtual ~Helper() = default;

    virtual std::vector<std::string> extract_objects(const std::string& response,
                                                     EventLog& log) = 0;

    /// Attribute statements with the examinee masked as "The object".
    /// Statements that still name the object are dropped and noted.
    virtual std::vector<std::string> extract_attributes(const std::string& description,
                                                        const std::string& object,
                                                        EventLog& log) = 0;

    virtual core::LoopOutcome judge_loop(const std::string& answer,
                                         const std::string& object, EventLog& log) = 0;

    virtual std::string rewrite(const std::string& response,
                                const std::vector<std::string>& flagged, EventLog& log) = 0;

    virtual std::string id() const = 0;
};

/// Lexicon-driven helper: noun-scan extraction, mechanical masking,
/// containment loop judgement, sentence-filter rewriting.
class RuleBasedHelper : public Helper {
public:
    explicit RuleBasedHelper(text::Lexicon lexicon);

    std::vector<std::string> extract_objects(const std::string& response,
                                             EventLog& log) override;
    std::vector<std::string> extract_attributes(const std::string& description,
                                                const std::string& object,
                                                EventLog& log) override;
    core::LoopOutcome judge_loop(const std::string& answer, const std::string& object,
                                 EventLog& log) override;
    std::string rewrite(const std::string& response, const std::vector<std::string>& flagged,
                        EventLog& log) override;
    std::string id() const override { return "rule"; }

    const text::Lexicon& lexicon() const { return lexicon_; }

private:
    text::Lexicon lexicon_;
};

/// Prompts a text model for each sub-task and parses its replies.
class ModelHelper : public Helper {
public:
    ModelHelper(chat::ChatBackend& backend, const prompts::PromptRegistry& registry,
                chat::SamplingParams params = {});

    std::vector<std::string> extract_objects(const std::string& response,
                                             EventLog& log) override;
    std::vector<std::string> extract_attributes(const std::string& description,
                                                const std::string& object,
                                                EventLog& log) override;
    core::LoopOutcome judge_loop(const std::string& answer, const std::string& object,
                                 EventLog& log) override;
    std::string rewrite(const std::string& response, const std::vector<std::string>& flagged,
                        EventLog& log) override;
    std::string id() const override { return backend_.id(); }

private:
    std::string ask(prompts::TemplateId id, const std::map<std::string, std::string>& bindings,
                    const std::string& stage, const std::string& object, EventLog& log);

    chat::ChatBackend& backend_;
    const prompts::PromptRegistry& registry_;
    chat::SamplingParams params_;
};

struct PipelineTranscript {
    std::string run_id;
    std::string instruction;
    std::string image_ref;
    QuestionKind kind = QuestionKind::OpenEnded;
    bool short_circuited = false;
    std::string queried_object;  // binary questions only
    std::vector<store::TranscriptEvent> events;
    std::vector<core::ExamineeObject> objects;
    std::string original_response;
    std::string revised_response;
};

/// Writes a full run as typed JSONL lines (run / event / object / result).
void save_run(const PipelineTranscript& t, store::TranscriptWriter& writer);

struct GatherResult {
    std::vector<std::string> descriptions;
    std::vector<std::string> attributes;
    int rounds = 0;
};

class Pipeline {
public:
    Pipeline(chat::ChatBackend& lvlm, Helper& helper, const prompts::PromptRegistry& registry,
             PipelineConfig cfg);

    /// Full five-stage run. On a stage error the partial transcript is
    /// flushed to the sink (when given) and the error rethrown.
    PipelineTranscript run(const std::string& instruction, const std::string& image_ref = "",
                           std::optional<chat::ImageAttachment> image = std::nullopt,
                           store::TranscriptWriter* sink = nullptr);

    std::vector<std::string> extract_objects(const std::string& response, EventLog& log);

    /// Samples descriptions until min_attributes are gathered or rounds
    /// run out; returns whatever was collected.
    GatherResult gather_attributes(const std::string& object, EventLog& log,
                                   const std::optional<chat::ImageAttachment>& image = {});

    /// Deterministic template expansion; never names the examinee object.
    std::vector<std::string> formulate_questions(
        const std::vector<std::string>& attributes) const;

    std::vector<std::string> inquire_objects(const std::vector<std::string>& questions,
                                             const std::string& object, EventLog& log,
                                             const std::optional<chat::ImageAttachment>& image = {});

    /// Empty answers are open loops without a helper call.
    core::LoopOutcome check_loop(const std::string& answer, const std::string& object,
                                 EventLog& log);

    /// Pure re-classification of gathered outcomes; zero-attribute objects
    /// carry the sentinel score, which behaves as 0.0 under the strict
    /// threshold rule.
    static void detect(std::vector<core::ExamineeObject>& objects, double lambda);

    std::string mitigate(const std::string& original,
                         const std::vector<core::ExamineeObject>& objects, QuestionKind kind,
                         const std::string& queried_object, EventLog& log);

    const PipelineConfig& config() const { return cfg_; }

private:
    core::ExamineeObject probe_object(const std::string& name, EventLog& log,
                                      const std::optional<chat::ImageAttachment>& image);
    std::string attribute_predicate(const std::string& statement) const;

    chat::ChatBackend& lvlm_;
    Helper& helper_;
    const prompts::PromptRegistry& registry_;
    PipelineConfig cfg_;

    std::mutex memo_mutex_;
    std::map<std::string, core::Verdict> memo_;
};

/// Runs every record through a fresh pipeline against the backend the
/// factory supplies for it; used by the benchmark CLI and the acceptance
/// suite. The oracle callback (optional) labels examinees for simulator
/// runs.
std::vector<eval::RecordResult> run_benchmark(
    const std::vector<eval::EvalRecord>& records,
    const std::function<chat::ChatBackend&(const eval::EvalRecord&)>& backend_for,
    Helper& helper, const prompts::PromptRegistry& registry, const PipelineConfig& cfg,
    const std::function<std::optional<bool>(const eval::EvalRecord&, const std::string&)>&
        oracle = nullptr,
    store::TranscriptWriter* sink = nullptr);

}  // namespace loopcheck::pipe
