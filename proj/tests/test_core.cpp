#include <doctest.h>

#include <algorithm>
#include <random>

#include "loopcheck/core.hpp"

using namespace loopcheck::core;

namespace {

std::vector<LoopOutcome> outcomes_from(std::initializer_list<int> bits) {
    std::vector<LoopOutcome> v;
    for (int b : bits) v.push_back(LoopOutcome{b != 0});
    return v;
}

// independent oracle: plain counter over the raw values
double brute_force_rate(const std::vector<LoopOutcome>& v) {
    double sum = 0.0;
    for (const auto& o : v) sum += o.value();
    return sum / double(v.size());
}

}  // namespace

TEST_CASE("loop_rate arithmetic mean of binary outcomes") {
    CHECK(loop_rate(outcomes_from({1, 1, 0, 1})).value() == doctest::Approx(0.75));
    CHECK(loop_rate(outcomes_from({0, 0, 0, 0})).value() == 0.0);
    // one closed loop of four, the flagged-object fixture
    LoopRateScore s = loop_rate(outcomes_from({0, 1, 0, 0}));
    CHECK(s.value() == doctest::Approx(0.25));
    CHECK(s.closed_count == 1);
    CHECK(s.n_questions == 4);
}

TEST_CASE("loop_rate rejects an empty list") {
    CHECK_THROWS_AS(loop_rate({}), EmptyOutcomes);
}

TEST_CASE("loop_rate equals brute-force counter on random vectors") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 2000; ++trial) {
        size_t len = 1 + rng() % 50;
        std::vector<LoopOutcome> v;
        for (size_t i = 0; i < len; ++i) v.push_back(LoopOutcome{(rng() & 1) != 0});
        LoopRateScore s = loop_rate(v);
        CHECK(s.value() == brute_force_rate(v));
        // the exact rational is a count over the length
        CHECK(s.n_questions == int(len));
        int closed = 0;
        for (const auto& o : v) closed += o.closed ? 1 : 0;
        CHECK(s.closed_count == closed);
    }
}

TEST_CASE("loop_rate invariant under permutation") {
    std::mt19937 rng(99);
    std::vector<LoopOutcome> v = outcomes_from({1, 0, 1, 1, 0, 0, 1});
    LoopRateScore before = loop_rate(v);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(v.begin(), v.end(), rng);
        CHECK(loop_rate(v) == before);
    }
}

TEST_CASE("classify strict threshold rule") {
    LoopRateScore quarter{1, 4};
    LoopRateScore full{4, 4};
    LoopRateScore boundary{2, 5};  // 0.40 exactly

    CHECK(classify(quarter, 0.4).kind == VerdictKind::Hallucinated);
    CHECK(classify(full, 0.4).kind == VerdictKind::Existent);
    // score == lambda stays Existent under the strict rule
    CHECK(classify(boundary, 0.4).kind == VerdictKind::Existent);
}

TEST_CASE("classify threshold validation") {
    CHECK_THROWS_AS(classify(LoopRateScore{1, 2}, -0.1), InvalidThreshold);
    CHECK_THROWS_AS(classify(LoopRateScore{1, 2}, 1.5), InvalidThreshold);
}

TEST_CASE("classify at threshold zero flags nothing") {
    for (int closed = 0; closed <= 6; ++closed) {
        LoopRateScore s{closed, 6};
        CHECK(classify(s, 0.0).kind == VerdictKind::Existent);
    }
}

TEST_CASE("classify monotone in the threshold") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        int total = 1 + int(rng() % 20);
        int closed = int(rng() % (total + 1));
        LoopRateScore s{closed, total};
        double l1 = double(rng() % 101) / 100.0;
        double l2 = double(rng() % 101) / 100.0;
        if (l1 > l2) std::swap(l1, l2);
        if (classify(s, l1).kind == VerdictKind::Hallucinated)
            CHECK(classify(s, l2).kind == VerdictKind::Hallucinated);
    }
}

TEST_CASE("sentinel score is rejected by classify") {
    CHECK_THROWS_AS(classify(LoopRateScore{}, 0.4), std::invalid_argument);
}
