#include "loopcheck/core.hpp"

namespace loopcheck::core {

LoopRateScore loop_rate(const std::vector<LoopOutcome>& outcomes) {
    if (outcomes.empty()) throw EmptyOutcomes();
    LoopRateScore score;
    score.n_questions = int(outcomes.size());
    for (const LoopOutcome& o : outcomes) {
        if (o.closed) ++score.closed_count;
    }
    return score;
}

Verdict classify(const LoopRateScore& score, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw InvalidThreshold(threshold);
    if (score.is_sentinel())
        throw std::invalid_argument("classify: sentinel score has no defined verdict");
    Verdict v;
    v.score = score;
    v.threshold = threshold;
    v.kind = score.value() < threshold ? VerdictKind::Hallucinated : VerdictKind::Existent;
    return v;
}

const char* to_string(VerdictKind kind) {
    return kind == VerdictKind::Hallucinated ? "hallucinated" : "existent";
}

}  // namespace loopcheck::core
