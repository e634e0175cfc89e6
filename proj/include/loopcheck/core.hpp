#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopcheck::core {

struct EmptyOutcomes : std::runtime_error {
    EmptyOutcomes() : std::runtime_error("loop_rate: outcome list is empty") {}
};

struct InvalidThreshold : std::runtime_error {
    explicit InvalidThreshold(double v)
        : std::runtime_error("classify: threshold " + std::to_string(v) +
                             " outside [0, 1]") {}
};

/// Binary outcome of one attribute-to-object probe: closed means the
/// examinee object appears in the answer.
struct LoopOutcome {
    bool closed = false;

    double value() const { return closed ? 1.0 : 0.0; }
    bool operator==(const LoopOutcome&) const = default;
};

/// Fraction of closed loops, kept as an exact count/total pair so that
/// threshold comparisons reproduce across platforms. n_questions == 0 is
/// the sentinel for "no attributes were gathered" and never comes out of
/// loop_rate().
struct LoopRateScore {
    int closed_count = 0;
    int n_questions = 0;

    double value() const {
        return n_questions == 0 ? 0.0 : double(closed_count) / double(n_questions);
    }
    bool is_sentinel() const { return n_questions == 0; }
    bool operator==(const LoopRateScore&) const = default;
};

enum class VerdictKind { Existent, Hallucinated };

struct Verdict {
    VerdictKind kind = VerdictKind::Existent;
    LoopRateScore score;
    double threshold = 0.0;

    bool hallucinated() const { return kind == VerdictKind::Hallucinated; }
    bool operator==(const Verdict&) const = default;
};

/// One object mention under test, accumulated across the pipeline stages.
/// On completion |attributes| == |questions| == |answers| == |outcomes|.
struct ExamineeObject {
    std::string name;
    std::vector<std::string> descriptions;
    std::vector<std::string> attributes;
    std::vector<std::string> questions;
    std::vector<std::string> answers;
    std::vector<LoopOutcome> outcomes;
    std::optional<Verdict> verdict;
};

/// Closed-loop rate: count of closed outcomes over the total. Throws
/// EmptyOutcomes on an empty list.
LoopRateScore loop_rate(const std::vector<LoopOutcome>& outcomes);

/// Hallucinated iff score strictly below the threshold, so threshold 0.0
/// flags nothing. Requires a non-sentinel score and threshold in [0, 1].
Verdict classify(const LoopRateScore& score, double threshold);

const char* to_string(VerdictKind kind);

}  // namespace loopcheck::core
