#include "loopcheck/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "loopcheck/text.hpp"

namespace loopcheck::eval {

using nlohmann::json;

Rational::Rational(int64_t n, int64_t d) : num(n), den(d) {
    if (den == 0) {
        num = 0;
        den = 1;
        return;
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

std::string Rational::percent() const {
    // round half up on the exact fraction: floor(num*10000/den + 1/2)
    int64_t scaled = num * 10000;
    int64_t whole = (2 * scaled + den) / (2 * den);
    std::ostringstream ss;
    ss << whole / 100 << '.' << char('0' + (whole / 10) % 10) << char('0' + whole % 10);
    return ss.str();
}

Setting setting_from_string(const std::string& s) {
    if (s == "random") return Setting::Random;
    if (s == "popular") return Setting::Popular;
    if (s == "adversarial") return Setting::Adversarial;
    if (s == "existence") return Setting::Existence;
    throw std::invalid_argument("unknown setting: " + s);
}

const char* to_string(Setting s) {
    switch (s) {
        case Setting::Random: return "random";
        case Setting::Popular: return "popular";
        case Setting::Adversarial: return "adversarial";
        case Setting::Existence: return "existence";
    }
    return "random";
}

const char* to_string(Answer a) {
    switch (a) {
        case Answer::Yes: return "yes";
        case Answer::No: return "no";
        case Answer::Unparseable: return "unparseable";
    }
    return "unparseable";
}

Answer answer_from_string(const std::string& s) {
    if (s == "yes") return Answer::Yes;
    if (s == "no") return Answer::No;
    return Answer::Unparseable;
}

json to_json(const EvalRecord& r) {
    return json{{"image_id", r.image_id},
                {"question", r.question},
                {"label", r.label == Label::Yes ? "yes" : "no"},
                {"setting", to_string(r.setting)}};
}

EvalRecord record_from_json(const json& j) {
    EvalRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    std::string label = j.at("label").get<std::string>();
    if (label == "yes")
        r.label = Label::Yes;
    else if (label == "no")
        r.label = Label::No;
    else
        throw std::invalid_argument("label must be yes or no, got: " + label);
    r.setting = setting_from_string(j.at("setting").get<std::string>());
    if (r.question.empty()) throw std::invalid_argument("question is empty");
    return r;
}

std::vector<EvalRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "cannot open " + path.string());
    std::vector<EvalRecord> records;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (text::trim(line).empty()) continue;
        EvalRecord r;
        try {
            r = record_from_json(json::parse(line));
        } catch (const std::exception& e) {
            throw ParseError(line_number, e.what());
        }
        if (!seen.insert({r.image_id, r.question}).second) {
            throw DuplicateRecord("duplicate record at line " + std::to_string(line_number) +
                                  ": (" + r.image_id + ", " + r.question + ")");
        }
        records.push_back(std::move(r));
    }
    return records;
}

void save_records(const std::vector<EvalRecord>& records, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

Answer parse_binary_answer(const std::string& response) {
    std::vector<std::string> tokens = text::tokenize(response);
    for (size_t i = 0; i < tokens.size(); ++i) {
        // longest cue first at each position
        if (tokens[i] == "there" && i + 2 < tokens.size() && tokens[i + 1] == "is" &&
            (tokens[i + 2] == "no" || tokens[i + 2] == "not"))
            return Answer::No;
        if (tokens[i] == "there" && i + 3 < tokens.size() && tokens[i + 1] == "are" &&
            tokens[i + 2] == "no")
            return Answer::No;
        if (tokens[i] == "there" && i + 1 < tokens.size() &&
            (tokens[i + 1] == "is" || tokens[i + 1] == "are"))
            return Answer::Yes;
        if (tokens[i] == "yes") return Answer::Yes;
        if (tokens[i] == "no" || tokens[i] == "not" || tokens[i] == "don" ||
            tokens[i] == "doesn" || tokens[i] == "isn" || tokens[i] == "aren")
            return Answer::No;
    }
    return Answer::Unparseable;
}

namespace {

MetricsReport metrics_from_counts(int64_t tp, int64_t fp, int64_t tn, int64_t fn) {
    MetricsReport m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    m.n_records = tp + fp + tn + fn;
    m.accuracy = Rational(tp + tn, m.n_records);
    m.precision = tp + fp > 0 ? Rational(tp, tp + fp) : Rational(0, 1);
    m.recall = tp + fn > 0 ? Rational(tp, tp + fn) : Rational(0, 1);
    // 2pr/(p+r) collapses to 2tp/(2tp+fp+fn); 0 when the denominator is 0
    m.f1 = 2 * tp + fp + fn > 0 ? Rational(2 * tp, 2 * tp + fp + fn) : Rational(0, 1);
    return m;
}

}  // namespace

MetricsReport evaluate_pope(const std::vector<Answer>& predictions,
                            const std::vector<EvalRecord>& records) {
    if (predictions.size() != records.size())
        throw LengthMismatch(predictions.size(), records.size());
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        bool truth = records[i].label == Label::Yes;
        // an unparseable answer scores as the wrong class
        bool pred = predictions[i] == Answer::Yes ||
                    (predictions[i] == Answer::Unparseable && !truth);
        if (pred && truth)
            ++tp;
        else if (pred && !truth)
            ++fp;
        else if (!pred && !truth)
            ++tn;
        else
            ++fn;
    }
    return metrics_from_counts(tp, fp, tn, fn);
}

std::pair<Rational, Rational> evaluate_mme(
    const std::vector<std::pair<bool, bool>>& per_image) {
    if (per_image.empty()) throw MalformedPair("no image pairs");
    int64_t correct = 0, both = 0;
    for (const auto& [a, b] : per_image) {
        correct += int(a) + int(b);
        both += int(a && b);
    }
    return {Rational(correct, int64_t(per_image.size()) * 2),
            Rational(both, int64_t(per_image.size()))};
}

json to_json(const MetricsReport& m) {
    json j{
        {"tp", m.tp},         {"fp", m.fp},
        {"tn", m.tn},         {"fn", m.fn},
        {"n", m.n_records},   {"accuracy", m.accuracy.percent()},
        {"precision", m.precision.percent()},
        {"recall", m.recall.percent()},
        {"f1", m.f1.percent()},
    };
    if (m.acc_plus) j["acc_plus"] = m.acc_plus->percent();
    return j;
}

std::string format_table(const MetricsReport& m) {
    std::ostringstream ss;
    ss << "records   " << m.n_records << "\n"
       << "tp/fp/tn/fn  " << m.tp << "/" << m.fp << "/" << m.tn << "/" << m.fn << "\n"
       << "accuracy  " << m.accuracy.percent() << "\n"
       << "precision " << m.precision.percent() << "\n"
       << "recall    " << m.recall.percent() << "\n"
       << "f1        " << m.f1.percent() << "\n";
    if (m.acc_plus) ss << "acc+      " << m.acc_plus->percent() << "\n";
    return ss.str();
}

json to_json(const RecordResult& r) {
    json j = to_json(r.record);
    j["original_pred"] = to_string(r.original_pred);
    j["mitigated_pred"] = to_string(r.mitigated_pred);
    j["examinee"] = r.examinee;
    j["attributes"] = r.attributes_gathered;
    if (r.score_closed) {
        j["score_closed"] = *r.score_closed;
        j["score_total"] = *r.score_total;
    }
    if (r.oracle_present) j["oracle_present"] = *r.oracle_present;
    return j;
}

RecordResult record_result_from_json(const json& j) {
    RecordResult r;
    r.record = record_from_json(j);
    r.original_pred = answer_from_string(j.at("original_pred").get<std::string>());
    r.mitigated_pred = answer_from_string(j.at("mitigated_pred").get<std::string>());
    r.examinee = j.value("examinee", "");
    r.attributes_gathered = j.value("attributes", 0);
    if (j.contains("score_closed")) {
        r.score_closed = j.at("score_closed").get<int>();
        r.score_total = j.at("score_total").get<int>();
    }
    if (j.contains("oracle_present")) r.oracle_present = j.at("oracle_present").get<bool>();
    return r;
}

std::vector<RecordResult> load_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "cannot open " + path.string());
    std::vector<RecordResult> rows;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (text::trim(line).empty()) continue;
        try {
            rows.push_back(record_result_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(line_number, e.what());
        }
    }
    return rows;
}

void save_results(const std::vector<RecordResult>& results,
                  const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    for (const auto& r : results) out << to_json(r).dump() << '\n';
}

Answer reclassify(const RecordResult& row, double threshold) {
    if (row.original_pred != Answer::Yes) return row.original_pred;
    if (row.examinee.empty()) return row.original_pred;
    if (!row.score_total)
        throw MissingScores("record (" + row.record.image_id + ", " + row.record.question +
                            ") affirmed an object but carries no loop score");
    // the zero-attribute sentinel behaves as score 0.0 under the same
    // strict rule, so threshold 0.0 flags nothing at all
    double value = *row.score_total == 0
                       ? 0.0
                       : double(*row.score_closed) / double(*row.score_total);
    return value < threshold ? Answer::No : Answer::Yes;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 9; ++i) grid.push_back(i / 10.0);
    return grid;
}

std::vector<SweepPoint> sweep_lambda(const std::vector<RecordResult>& rows,
                                     const std::vector<double>& grid) {
    std::vector<EvalRecord> records;
    records.reserve(rows.size());
    for (const auto& r : rows) records.push_back(r.record);
    std::vector<SweepPoint> points;
    for (double threshold : grid) {
        std::vector<Answer> preds;
        preds.reserve(rows.size());
        for (const auto& r : rows) preds.push_back(reclassify(r, threshold));
        points.push_back({threshold, evaluate_pope(preds, records)});
    }
    return points;
}

std::string format_sweep_table(const std::vector<SweepPoint>& points) {
    std::ostringstream ss;
    ss << "lambda  accuracy  f1\n";
    for (const auto& p : points) {
        char line[64];
        std::snprintf(line, sizeof line, "%.1f     %7s  %7s\n", p.threshold,
                      p.metrics.accuracy.percent().c_str(), p.metrics.f1.percent().c_str());
        ss << line;
    }
    return ss.str();
}

namespace {

ClassStats class_stats(const std::vector<int>& counts) {
    ClassStats s;
    s.count = int64_t(counts.size());
    if (counts.empty()) return s;
    double sum = std::accumulate(counts.begin(), counts.end(), 0.0);
    s.mean = sum / double(counts.size());
    double sq = 0.0;
    for (int c : counts) sq += (c - s.mean) * (c - s.mean);
    s.stddev = std::sqrt(sq / double(counts.size()));
    return s;
}

}  // namespace

AttributeCountStats attribute_count_stats(const std::vector<ObjectCountSample>& samples) {
    std::vector<int> existent, hallucinated;
    for (const auto& s : samples) {
        (s.existent ? existent : hallucinated).push_back(s.attribute_count);
    }
    if (existent.empty()) throw EmptyClass("no existent objects in the sample");
    if (hallucinated.empty()) throw EmptyClass("no hallucinated objects in the sample");
    return {class_stats(existent), class_stats(hallucinated)};
}

std::string format_class_stats(const ClassStats& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f ± %.4f", s.mean, s.stddev);
    return buf;
}

}  // namespace loopcheck::eval
