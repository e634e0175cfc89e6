#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace loopcheck::eval {

struct ParseError : std::runtime_error {
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

struct DuplicateRecord : std::runtime_error {
    explicit DuplicateRecord(const std::string& what) : std::runtime_error(what) {}
};

struct LengthMismatch : std::runtime_error {
    LengthMismatch(size_t preds, size_t records)
        : std::runtime_error("got " + std::to_string(preds) + " predictions for " +
                             std::to_string(records) + " records") {}
};

struct MalformedPair : std::runtime_error {
    explicit MalformedPair(const std::string& what) : std::runtime_error(what) {}
};

struct MissingScores : std::runtime_error {
    explicit MissingScores(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyClass : std::runtime_error {
    explicit EmptyClass(const std::string& what) : std::runtime_error(what) {}
};

/// Exact fraction, normalized; metrics are computed and compared without
/// floating-point error.
struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d);

    double value() const { return den == 0 ? 0.0 : double(num) / double(den); }
    bool operator==(const Rational&) const = default;
    bool operator<=(const Rational& o) const { return num * o.den <= o.num * den; }

    /// "75.00" style, two decimals, round half up.
    std::string percent() const;
};

enum class Setting { Random, Popular, Adversarial, Existence };

Setting setting_from_string(const std::string& s);
const char* to_string(Setting s);

enum class Label { Yes, No };

struct EvalRecord {
    std::string image_id;
    std::string question;
    Label label = Label::No;
    Setting setting = Setting::Random;
};

nlohmann::json to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

/// JSONL loader; rejects duplicate (image_id, question) pairs and reports
/// parse failures with their line number.
std::vector<EvalRecord> load_records(const std::filesystem::path& path);
void save_records(const std::vector<EvalRecord>& records, const std::filesystem::path& path);

enum class Answer { Yes, No, Unparseable };

const char* to_string(Answer a);
Answer answer_from_string(const std::string& s);

/// Leading-cue polarity of a free-text answer. Total function; text with
/// no affirmation or negation cue is Unparseable (scored as wrong).
Answer parse_binary_answer(const std::string& response);

struct MetricsReport {
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    int64_t n_records = 0;
    Rational accuracy, precision, recall, f1;
    std::optional<Rational> acc_plus;

    bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& m);
std::string format_table(const MetricsReport& m);

/// POPE scoring: positive class is "yes"; an Unparseable prediction counts
/// against whichever label it faces.
MetricsReport evaluate_pope(const std::vector<Answer>& predictions,
                            const std::vector<EvalRecord>& records);

/// MME existence scoring over per-image question pairs: acc counts
/// questions, acc+ counts images with both questions right.
std::pair<Rational, Rational> evaluate_mme(
    const std::vector<std::pair<bool, bool>>& per_image);

/// Per-record pipeline outcome, persisted as results JSONL; carries
/// everything a threshold sweep needs so re-classification is pure.
struct RecordResult {
    EvalRecord record;
    Answer original_pred = Answer::Unparseable;
    std::string examinee;              // empty when the run short-circuited
    std::optional<int> score_closed;   // loop outcomes closed / total
    std::optional<int> score_total;
    int attributes_gathered = 0;
    Answer mitigated_pred = Answer::Unparseable;
    std::optional<bool> oracle_present;  // simulator runs only
};

nlohmann::json to_json(const RecordResult& r);
RecordResult record_result_from_json(const nlohmann::json& j);
std::vector<RecordResult> load_results(const std::filesystem::path& path);
void save_results(const std::vector<RecordResult>& results, const std::filesystem::path& path);

/// Prediction at a given threshold from stored scores, without model
/// calls. threshold 0.0 reproduces the vanilla prediction exactly.
Answer reclassify(const RecordResult& row, double threshold);

struct SweepPoint {
    double threshold;
    MetricsReport metrics;
};

/// Default grid 0.0 .. 0.9 step 0.1.
std::vector<double> default_lambda_grid();

std::vector<SweepPoint> sweep_lambda(const std::vector<RecordResult>& rows,
                                     const std::vector<double>& grid);

std::string format_sweep_table(const std::vector<SweepPoint>& points);

struct ClassStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
    int64_t count = 0;
};

struct AttributeCountStats {
    ClassStats existent;
    ClassStats hallucinated;
};

/// Per-object attribute counts split by oracle existence.
struct ObjectCountSample {
    int attribute_count = 0;
    bool existent = false;
};

AttributeCountStats attribute_count_stats(const std::vector<ObjectCountSample>& samples);

/// "3.966 ± 1.3427" column style.
std::string format_class_stats(const ClassStats& s);

}  // namespace loopcheck::eval
