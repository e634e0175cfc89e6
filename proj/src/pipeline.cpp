#include "loopcheck/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <set>
#include <sstream>
#include <thread>

#include "loopcheck/sha256.hpp"

namespace loopcheck::pipe {

using chat::ChatMessage;
using core::ExamineeObject;
using core::LoopOutcome;

QuestionStyle question_style_from_string(const std::string& s) {
    if (s == "full" || s == "full_coverage") return QuestionStyle::FullCoverage;
    if (s == "simple") return QuestionStyle::Simple;
    throw std::invalid_argument("unknown question style: " + s);
}

const char* to_string(QuestionStyle s) {
    return s == QuestionStyle::FullCoverage ? "full" : "simple";
}

HelperMode helper_mode_from_string(const std::string& s) {
    if (s == "model") return HelperMode::Model;
    if (s == "rule" || s == "rule_based") return HelperMode::RuleBased;
    throw std::invalid_argument("unknown helper mode: " + s);
}

const char* to_string(HelperMode m) { return m == HelperMode::Model ? "model" : "rule"; }

void EventLog::add_call(const std::string& stage, const std::string& object,
                        const std::vector<ChatMessage>& messages,
                        const std::string& response, const std::string& backend,
                        const chat::ChatResult& result) {
    store::TranscriptEvent e;
    e.stage = stage;
    e.object = object;
    e.prompt = messages.back().text;
    e.prompt_sha = chat::prompt_digest(messages);
    e.response = response;
    e.backend = backend;
    e.duration_ms = result.duration_ms;
    e.retries = result.retries;
    events_.push_back(std::move(e));
}

void EventLog::add_note(const std::string& stage, const std::string& object,
                        const std::string& message) {
    store::TranscriptEvent e;
    e.stage = stage;
    e.object = object;
    e.response = message;
    e.backend = "-";
    events_.push_back(std::move(e));
}

// ---------------------------------------------------------------------------
// RuleBasedHelper

namespace {

// position of the object's token sequence, with the final token compared
// in singular form
std::optional<size_t> find_object_tokens(const std::vector<std::string>& tokens,
                                         const std::vector<std::string>& object_tokens) {
    size_t n = object_tokens.size();
    if (n == 0 || tokens.size() < n) return std::nullopt;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        bool match = true;
        for (size_t j = 0; j < n; ++j) {
            const bool last = j + 1 == n;
            std::string tok = last ? text::singularize(tokens[i + j]) : tokens[i + j];
            std::string want = last ? text::singularize(object_tokens[j]) : object_tokens[j];
            if (tok != want) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return std::nullopt;
}

bool is_attribute_verb(const std::string& token) {
    return token == "is" || token == "are" || token == "has" || token == "have";
}

std::string join_tokens(const std::vector<std::string>& tokens, size_t begin) {
    std::string out;
    for (size_t i = begin; i < tokens.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

RuleBasedHelper::RuleBasedHelper(text::Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

std::vector<std::string> RuleBasedHelper::extract_objects(const std::string& response,
                                                          EventLog&) {
    return lexicon_.extract(response);
}

std::vector<std::string> RuleBasedHelper::extract_attributes(const std::string& description,
                                                             const std::string& object,
                                                             EventLog& log) {
    std::string norm = text::normalize_object_name(object);
    std::vector<std::string> object_tokens = text::tokenize(norm);
    std::vector<std::string> statements;
    for (const std::string& sentence : text::split_sentences(description)) {
        std::vector<std::string> tokens = text::tokenize(sentence);
        auto pos = find_object_tokens(tokens, object_tokens);
        if (!pos) continue;
        size_t verb_at = *pos + object_tokens.size();
        if (verb_at >= tokens.size() || !is_attribute_verb(tokens[verb_at])) continue;
        // a noun before the examinee means the sentence is about something else
        if (*pos > 0) {
            std::string prefix = join_tokens(
                std::vector<std::string>(tokens.begin(), tokens.begin() + long(*pos)), 0);
            if (!lexicon_.extract(prefix).empty()) continue;
        }
        std::string predicate = join_tokens(tokens, verb_at);
        std::string statement = "The object " + predicate + " in the image";
        if (text::mentions_object(predicate, norm)) {
            log.add_note("attribute_extraction", norm,
                         "leak detected, statement dropped: " + statement);
            continue;
        }
        statements.push_back(std::move(statement));
    }
    return statements;
}

LoopOutcome RuleBasedHelper::judge_loop(const std::string& answer, const std::string& object,
                                        EventLog&) {
    std::string norm = text::normalize_object_name(object);
    if (lexicon_.contains(norm)) {
        std::vector<std::string> mentioned = lexicon_.extract(answer);
        bool found = std::find(mentioned.begin(), mentioned.end(), norm) != mentioned.end();
        return LoopOutcome{found};
    }
    return LoopOutcome{text::mentions_object(answer, norm)};
}

std::string RuleBasedHelper::rewrite(const std::string& response,
                                     const std::vector<std::string>& flagged, EventLog&) {
    std::vector<std::string> kept;
    for (const std::string& sentence : text::split_sentences(response)) {
        bool leaks = false;
        for (const std::string& f : flagged) {
            if (text::mentions_object(sentence, f)) {
                leaks = true;
                break;
            }
        }
        if (!leaks) kept.push_back(sentence);
    }
    if (kept.empty()) return "Nothing in the image can be stated with confidence.";
    std::string out;
    for (const auto& s : kept) out += s + ". ";
    out.pop_back();
    return out;
}

// ---------------------------------------------------------------------------
// ModelHelper

ModelHelper::ModelHelper(chat::ChatBackend& backend, const prompts::PromptRegistry& registry,
                         chat::SamplingParams params)
    : backend_(backend), registry_(registry), params_(params) {
    params_.n_samples = 1;
    params_.temperature = 0.0;
}

std::string ModelHelper::ask(prompts::TemplateId id,
                             const std::map<std::string, std::string>& bindings,
                             const std::string& stage, const std::string& object,
                             EventLog& log) {
    std::string prompt = registry_.render(id, bindings);
    std::vector<ChatMessage> messages{ChatMessage::user(prompt)};
    chat::ChatResult result;
    try {
        result = backend_.chat(messages, params_);
    } catch (const std::exception& e) {
        throw HelperFailure(std::string("helper call failed in ") + stage + ": " + e.what());
    }
    log.add_call(stage, object, messages, result.texts.front(), backend_.id(), result);
    return result.texts.front();
}

std::vector<std::string> ModelHelper::extract_objects(const std::string& response,
                                                      EventLog& log) {
    std::string reply = ask(prompts::TemplateId::ObjectExtraction, {{"response", response}},
                            "object_extraction", "", log);
    std::vector<std::string> names;
    std::string current;
    for (char c : reply + ",") {
        if (c == ',' || c == '\n' || c == ';') {
            std::string name = text::trim(current);
            current.clear();
            if (name.empty()) continue;
            std::string lowered = text::to_lower(name);
            if (lowered == "none" || lowered == "n/a") continue;
            names.push_back(name);
        } else {
            current.push_back(c);
        }
    }
    return names;
}

std::vector<std::string> ModelHelper::extract_attributes(const std::string& description,
                                                         const std::string& object,
                                                         EventLog& log) {
    std::string norm = text::normalize_object_name(object);
    std::string reply =
        ask(prompts::TemplateId::AttributeExtraction,
            {{"object", norm}, {"description", description}}, "attribute_extraction", norm, log);
    std::vector<std::string> statements;
    std::string line;
    std::istringstream lines(reply);
    while (std::getline(lines, line)) {
        std::string s = text::trim(line);
        // strip list markers the model may add
        while (!s.empty() && (s[0] == '-' || s[0] == '*' ||
                              std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.' ||
                              s[0] == ')'))
            s = text::trim(s.substr(1));
        if (!text::starts_with_ci(s, "the object ")) continue;
        if (text::mentions_object(s.substr(11), norm)) {
            log.add_note("attribute_extraction", norm,
                         "leak detected, statement dropped: " + s);
            continue;
        }
        statements.push_back("The object " + text::trim(s.substr(11)));
    }
    return statements;
}

LoopOutcome ModelHelper::judge_loop(const std::string& answer, const std::string& object,
                                    EventLog& log) {
    std::string norm = text::normalize_object_name(object);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply = ask(prompts::TemplateId::LoopCheck,
                                {{"object", norm}, {"answer", answer}}, "loop_check", norm, log);
        std::string token = text::to_lower(text::trim(reply));
        while (!token.empty() && !std::isalpha(static_cast<unsigned char>(token.back())))
            token.pop_back();
        if (token == "yes" || text::starts_with_ci(token, "yes")) return LoopOutcome{true};
        if (token == "no" || text::starts_with_ci(token, "no")) return LoopOutcome{false};
        log.add_note("loop_check", norm, "unparseable judgement: \"" + reply + "\"");
    }
    // conservative: an unreadable judgement counts as an open loop
    return LoopOutcome{false};
}

std::string ModelHelper::rewrite(const std::string& response,
                                 const std::vector<std::string>& flagged, EventLog& log) {
    std::string objects;
    for (size_t i = 0; i < flagged.size(); ++i) {
        if (i > 0) objects += ", ";
        objects += flagged[i];
    }
    return ask(prompts::TemplateId::Refinement, {{"response", response}, {"objects", objects}},
               "mitigation", "", log);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(chat::ChatBackend& lvlm, Helper& helper,
                   const prompts::PromptRegistry& registry, PipelineConfig cfg)
    : lvlm_(lvlm), helper_(helper), registry_(registry), cfg_(std::move(cfg)) {
    if (cfg_.min_attributes < 1) throw std::invalid_argument("min_attributes must be >= 1");
    if (cfg_.max_describe_rounds < 1)
        throw std::invalid_argument("max_describe_rounds must be >= 1");
    if (cfg_.lambda_threshold < 0.0 || cfg_.lambda_threshold > 1.0)
        throw core::InvalidThreshold(cfg_.lambda_threshold);
    if (cfg_.seed) {
        if (!cfg_.describe_sampling.seed) cfg_.describe_sampling.seed = cfg_.seed;
        if (!cfg_.answer_sampling.seed) cfg_.answer_sampling.seed = cfg_.seed;
    }
}

std::vector<std::string> Pipeline::extract_objects(const std::string& response,
                                                   EventLog& log) {
    if (text::trim(response).empty())
        throw std::invalid_argument("extract_objects: response is empty");
    std::vector<std::string> raw = helper_.extract_objects(response, log);
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& r : raw) {
        std::string norm = text::normalize_object_name(r);
        if (norm.empty()) continue;
        if (seen.insert(norm).second) names.push_back(norm);
    }
    return names;
}

std::string Pipeline::attribute_predicate(const std::string& statement) const {
    std::string s = text::trim(statement);
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?'))
        s.pop_back();
    if (text::starts_with_ci(s, "the object ")) s = s.substr(11);
    std::string lowered = text::to_lower(s);
    for (std::string_view tail : {" in the image", " in this image"}) {
        if (lowered.size() > tail.size() && lowered.ends_with(tail)) {
            s = s.substr(0, s.size() - tail.size());
            break;
        }
    }
    return text::collapse_spaces(text::trim(s));
}

GatherResult Pipeline::gather_attributes(const std::string& object, EventLog& log,
                                         const std::optional<chat::ImageAttachment>& image) {
    GatherResult out;
    std::set<std::string> seen;
    std::string prompt = registry_.render(prompts::TemplateId::DescribeObject,
                                          {{"object", object}});
    for (int round = 0; round < cfg_.max_describe_rounds; ++round) {
        chat::SamplingParams params = cfg_.describe_sampling;
        params.n_samples = 1;
        if (params.seed) params.seed = *params.seed + round;
        std::vector<ChatMessage> messages{ChatMessage::user(prompt)};
        messages.back().image = image;
        chat::ChatResult result = lvlm_.chat(messages, params);
        const std::string& description = result.texts.front();
        log.add_call("describe", object, messages, description, lvlm_.id(), result);
        out.descriptions.push_back(description);
        ++out.rounds;
        for (std::string& statement : helper_.extract_attributes(description, object, log)) {
            std::string key = text::to_lower(attribute_predicate(statement));
            if (key.empty()) continue;
            if (seen.insert(key).second) out.attributes.push_back(std::move(statement));
        }
        if (int(out.attributes.size()) >= cfg_.min_attributes) break;
    }
    return out;
}

std::vector<std::string> Pipeline::formulate_questions(
    const std::vector<std::string>& attributes) const {
    if (attributes.empty())
        throw std::invalid_argument("formulate_questions: no attributes");
    std::vector<std::string> questions;
    questions.reserve(attributes.size());
    for (const auto& statement : attributes) {
        std::string predicate = attribute_predicate(statement);
        if (cfg_.question_style == QuestionStyle::FullCoverage) {
            questions.push_back(registry_.render(
                prompts::TemplateId::QuestionFormulationFull,
                {{"attribute", text::pluralize_attribute_verb(predicate)}}));
        } else {
            questions.push_back(registry_.render(
                prompts::TemplateId::QuestionFormulationSimple, {{"attribute", predicate}}));
        }
    }
    return questions;
}

std::vector<std::string> Pipeline::inquire_objects(
    const std::vector<std::string>& questions, const std::string& object, EventLog& log,
    const std::optional<chat::ImageAttachment>& image) {
    std::vector<std::string> answers;
    answers.reserve(questions.size());
    for (const auto& q : questions) {
        chat::SamplingParams params = cfg_.answer_sampling;
        params.n_samples = 1;
        params.temperature = 0.0;
        std::vector<ChatMessage> messages{ChatMessage::user(q)};
        messages.back().image = image;
        chat::ChatResult result = lvlm_.chat(messages, params);
        log.add_call("attribute_inquiry", object, messages, result.texts.front(), lvlm_.id(),
                     result);
        answers.push_back(result.texts.front());
    }
    return answers;
}

LoopOutcome Pipeline::check_loop(const std::string& answer, const std::string& object,
                                 EventLog& log) {
    if (text::trim(answer).empty()) return LoopOutcome{false};
    return helper_.judge_loop(answer, object, log);
}

void Pipeline::detect(std::vector<ExamineeObject>& objects, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw core::InvalidThreshold(lambda);
    for (ExamineeObject& obj : objects) {
        if (obj.outcomes.empty()) {
            // sentinel: behaves as score 0.0 under the strict rule
            core::Verdict v;
            v.score = core::LoopRateScore{0, 0};
            v.threshold = lambda;
            v.kind = (0.0 < lambda) ? core::VerdictKind::Hallucinated
                                    : core::VerdictKind::Existent;
            obj.verdict = v;
        } else {
            obj.verdict = core::classify(core::loop_rate(obj.outcomes), lambda);
        }
    }
}

std::string Pipeline::mitigate(const std::string& original,
                               const std::vector<ExamineeObject>& objects, QuestionKind kind,
                               const std::string& queried_object, EventLog& log) {
    std::vector<std::string> flagged;
    for (const auto& obj : objects) {
        if (obj.verdict && obj.verdict->hallucinated()) flagged.push_back(obj.name);
    }
    if (flagged.empty()) return original;

    if (kind == QuestionKind::Binary) {
        bool queried_flagged =
            !queried_object.empty() &&
            std::find(flagged.begin(), flagged.end(), queried_object) != flagged.end();
        if (!queried_flagged) return original;
        std::string revised = "No, there is no " + queried_object + " in the image.";
        log.add_note("mitigation", queried_object, "binary answer corrected to negative");
        return revised;
    }

    std::string revised = helper_.rewrite(original, flagged, log);
    for (int pass = 0; pass < 2; ++pass) {
        std::string leaking;
        for (const auto& f : flagged) {
            if (text::mentions_object(revised, f)) {
                leaking = f;
                break;
            }
        }
        if (leaking.empty()) return revised;
        if (pass == 1)
            throw MitigationLeak("revised response still mentions \"" + leaking +
                                 "\" after two rewrite passes");
        log.add_note("mitigation", leaking, "rewrite leaked a flagged object; second pass");
        revised = helper_.rewrite(revised, flagged, log);
    }
    return revised;
}

ExamineeObject Pipeline::probe_object(const std::string& name, EventLog& log,
                                      const std::optional<chat::ImageAttachment>& image) {
    ExamineeObject obj;
    obj.name = name;
    GatherResult gathered = gather_attributes(name, log, image);
    obj.descriptions = std::move(gathered.descriptions);
    obj.attributes = std::move(gathered.attributes);
    if (obj.attributes.empty()) return obj;  // sentinel verdict at detect()
    obj.questions = formulate_questions(obj.attributes);
    obj.answers = inquire_objects(obj.questions, name, log, image);
    obj.outcomes.reserve(obj.answers.size());
    for (const auto& answer : obj.answers)
        obj.outcomes.push_back(check_loop(answer, name, log));
    return obj;
}

PipelineTranscript Pipeline::run(const std::string& instruction, const std::string& image_ref,
                                 std::optional<chat::ImageAttachment> image,
                                 store::TranscriptWriter* sink) {
    if (text::trim(instruction).empty())
        throw std::invalid_argument("run: instruction is empty");

    PipelineTranscript t;
    t.instruction = instruction;
    t.image_ref = image_ref;
    {
        std::string seed_tag = cfg_.seed ? std::to_string(*cfg_.seed) : "-";
        t.run_id = sha256_hex(instruction + '\x1f' + image_ref + '\x1f' + seed_tag)
                       .substr(0, 16);
    }

    EventLog pre;
    std::vector<ExamineeObject> objects;
    std::vector<EventLog> object_logs;
    EventLog post;

    auto assemble = [&]() {
        int64_t seq = 0;
        auto take = [&](EventLog& log) {
            for (auto& e : log.events()) {
                e.run_id = t.run_id;
                e.seq = ++seq;
                t.events.push_back(std::move(e));
            }
            log.events().clear();
        };
        take(pre);
        for (auto& log : object_logs) take(log);
        take(post);
        t.objects = objects;
        if (sink) save_run(t, *sink);
    };

    try {
        // initial response
        std::vector<ChatMessage> messages{ChatMessage::user(instruction)};
        messages.back().image = image;
        chat::ChatResult initial = lvlm_.chat(messages, cfg_.answer_sampling);
        t.original_response = initial.texts.front();
        pre.add_call("initial_response", "", messages, t.original_response, lvlm_.id(),
                     initial);

        std::optional<std::string> queried = text::parse_existence_question(instruction);
        t.kind = queried ? QuestionKind::Binary : QuestionKind::OpenEnded;
        if (queried) t.queried_object = *queried;

        std::vector<std::string> names;
        if (t.kind == QuestionKind::Binary) {
            eval::Answer polarity = eval::parse_binary_answer(t.original_response);
            if (polarity == eval::Answer::No) {
                // nothing asserted, nothing to verify
                t.short_circuited = true;
                t.revised_response = t.original_response;
                pre.add_note("short_circuit", *queried, "initial answer is negative");
                assemble();
                return t;
            }
            if (polarity == eval::Answer::Yes) {
                names.push_back(*queried);
            } else {
                names = extract_objects(t.original_response, pre);
            }
        } else {
            names = extract_objects(t.original_response, pre);
        }

        objects.resize(names.size());
        object_logs.resize(names.size());

        std::vector<size_t> pending;
        for (size_t i = 0; i < names.size(); ++i) {
            if (cfg_.memoize_verdicts && !image_ref.empty()) {
                std::lock_guard<std::mutex> lock(memo_mutex_);
                auto it = memo_.find(image_ref + '\x1f' + names[i]);
                if (it != memo_.end()) {
                    objects[i].name = names[i];
                    objects[i].verdict = it->second;
                    object_logs[i].add_note("memoized", names[i],
                                            "verdict reused from an earlier run");
                    continue;
                }
            }
            pending.push_back(i);
        }

        int workers = std::max(1, std::min<int>(cfg_.per_object_concurrency,
                                                int(pending.size())));
        if (workers <= 1) {
            for (size_t idx : pending)
                objects[idx] = probe_object(names[idx], object_logs[idx], image);
        } else {
            std::atomic<size_t> cursor{0};
            std::vector<std::exception_ptr> errors(pending.size());
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (size_t k = cursor.fetch_add(1); k < pending.size();
                         k = cursor.fetch_add(1)) {
                        size_t idx = pending[k];
                        try {
                            objects[idx] = probe_object(names[idx], object_logs[idx], image);
                        } catch (...) {
                            errors[k] = std::current_exception();
                        }
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& err : errors) {
                if (err) std::rethrow_exception(err);
            }
        }

        std::vector<ExamineeObject> fresh;
        std::vector<size_t> fresh_index;
        for (size_t idx : pending) {
            fresh.push_back(objects[idx]);
            fresh_index.push_back(idx);
        }
        detect(fresh, cfg_.lambda_threshold);
        for (size_t k = 0; k < fresh.size(); ++k) {
            size_t idx = fresh_index[k];
            objects[idx] = fresh[k];
            if (objects[idx].verdict && objects[idx].verdict->score.is_sentinel()) {
                object_logs[idx].add_note("detect", objects[idx].name,
                                          "no attributes gathered; sentinel score 0/0");
            }
            if (cfg_.memoize_verdicts && !image_ref.empty()) {
                std::lock_guard<std::mutex> lock(memo_mutex_);
                memo_[image_ref + '\x1f' + objects[idx].name] = *objects[idx].verdict;
            }
        }

        t.revised_response =
            mitigate(t.original_response, objects, t.kind, t.queried_object, post);
        assemble();
        return t;
    } catch (...) {
        assemble();  // keep the partial transcript
        throw;
    }
}

void save_run(const PipelineTranscript& t, store::TranscriptWriter& writer) {
    nlohmann::json header{
        {"type", "run"},
        {"run", t.run_id},
        {"instruction", t.instruction},
        {"image_ref", t.image_ref},
        {"kind", t.kind == QuestionKind::Binary ? "binary" : "open_ended"},
        {"short_circuited", t.short_circuited},
    };
    if (!t.queried_object.empty()) header["queried_object"] = t.queried_object;
    writer.append_line(header);
    for (const auto& e : t.events) writer.append(e);
    for (const auto& obj : t.objects) {
        nlohmann::json outcomes = nlohmann::json::array();
        for (const auto& o : obj.outcomes) outcomes.push_back(o.closed ? 1 : 0);
        nlohmann::json jo{
            {"type", "object"},       {"run", t.run_id},
            {"name", obj.name},       {"descriptions", obj.descriptions},
            {"attributes", obj.attributes}, {"questions", obj.questions},
            {"answers", obj.answers}, {"outcomes", std::move(outcomes)},
        };
        if (obj.verdict) {
            jo["verdict"] = {{"kind", core::to_string(obj.verdict->kind)},
                             {"closed", obj.verdict->score.closed_count},
                             {"total", obj.verdict->score.n_questions},
                             {"threshold", obj.verdict->threshold}};
        }
        writer.append_line(jo);
    }
    writer.append_line(nlohmann::json{{"type", "result"},
                                      {"run", t.run_id},
                                      {"original", t.original_response},
                                      {"revised", t.revised_response}});
}

std::vector<eval::RecordResult> run_benchmark(
    const std::vector<eval::EvalRecord>& records,
    const std::function<chat::ChatBackend&(const eval::EvalRecord&)>& backend_for,
    Helper& helper, const prompts::PromptRegistry& registry, const PipelineConfig& cfg,
    const std::function<std::optional<bool>(const eval::EvalRecord&, const std::string&)>&
        oracle,
    store::TranscriptWriter* sink) {
    std::vector<eval::RecordResult> rows;
    rows.reserve(records.size());
    for (const auto& record : records) {
        Pipeline pipeline(backend_for(record), helper, registry, cfg);
        PipelineTranscript t = pipeline.run(record.question, record.image_id, std::nullopt,
                                            sink);
        eval::RecordResult row;
        row.record = record;
        row.original_pred = eval::parse_binary_answer(t.original_response);
        row.mitigated_pred = eval::parse_binary_answer(t.revised_response);
        if (!t.objects.empty()) {
            const ExamineeObject& examinee = t.objects.front();
            row.examinee = examinee.name;
            row.attributes_gathered = int(examinee.attributes.size());
            if (examinee.verdict) {
                row.score_closed = examinee.verdict->score.closed_count;
                row.score_total = examinee.verdict->score.n_questions;
            }
        }
        if (oracle && !row.examinee.empty())
            row.oracle_present = oracle(record, row.examinee);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace loopcheck::pipe
