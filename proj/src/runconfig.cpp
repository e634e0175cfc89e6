#include "loopcheck/runconfig.hpp"

#include <fstream>
#include <set>

#include "loopcheck/http_backend.hpp"
#include "loopcheck/replay.hpp"

namespace loopcheck::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

}  // namespace

chat::BackendConfig backend_from_json(const json& j, chat::BackendConfig base) {
    reject_unknown_keys(j,
                        {"kind", "endpoint_url", "model_name", "auth_token_env_var",
                         "timeout_ms", "max_retries", "cache_dir", "cache_nondeterministic",
                         "server_supports_n", "max_inflight", "retry_base_ms",
                         "retry_jitter_cap_ms", "scene_fixture", "transcript_path",
                         "backend_filter", "profile"},
                        "backend config");
    if (j.contains("kind"))
        base.kind = chat::backend_kind_from_string(j.at("kind").get<std::string>());
    base.endpoint_url = j.value("endpoint_url", base.endpoint_url);
    base.model_name = j.value("model_name", base.model_name);
    base.auth_token_env_var = j.value("auth_token_env_var", base.auth_token_env_var);
    base.timeout_ms = j.value("timeout_ms", base.timeout_ms);
    base.max_retries = j.value("max_retries", base.max_retries);
    base.cache_dir = j.value("cache_dir", base.cache_dir);
    base.cache_nondeterministic = j.value("cache_nondeterministic", base.cache_nondeterministic);
    base.server_supports_n = j.value("server_supports_n", base.server_supports_n);
    base.max_inflight = j.value("max_inflight", base.max_inflight);
    base.retry_base_ms = j.value("retry_base_ms", base.retry_base_ms);
    base.retry_jitter_cap_ms = j.value("retry_jitter_cap_ms", base.retry_jitter_cap_ms);
    for (const char* key : {"scene_fixture", "transcript_path", "backend_filter", "profile"}) {
        if (j.contains(key)) base.extra[key] = j.at(key);
    }
    return base;
}

pipe::PipelineConfig pipeline_from_json(const json& j, pipe::PipelineConfig base) {
    reject_unknown_keys(j,
                        {"lambda", "min_attributes", "max_describe_rounds", "question_style",
                         "helper_mode", "describe_temperature", "describe_max_tokens",
                         "answer_max_tokens", "per_object_concurrency", "memoize_verdicts"},
                        "pipeline config");
    base.lambda_threshold = j.value("lambda", base.lambda_threshold);
    base.min_attributes = j.value("min_attributes", base.min_attributes);
    base.max_describe_rounds = j.value("max_describe_rounds", base.max_describe_rounds);
    if (j.contains("question_style"))
        base.question_style =
            pipe::question_style_from_string(j.at("question_style").get<std::string>());
    if (j.contains("helper_mode"))
        base.helper_mode = pipe::helper_mode_from_string(j.at("helper_mode").get<std::string>());
    base.describe_sampling.temperature =
        j.value("describe_temperature", base.describe_sampling.temperature);
    base.describe_sampling.max_tokens =
        j.value("describe_max_tokens", base.describe_sampling.max_tokens);
    base.answer_sampling.max_tokens =
        j.value("answer_max_tokens", base.answer_sampling.max_tokens);
    base.per_object_concurrency =
        j.value("per_object_concurrency", base.per_object_concurrency);
    base.memoize_verdicts = j.value("memoize_verdicts", base.memoize_verdicts);
    return base;
}

RunConfig apply_config_json(const json& j, RunConfig base) {
    reject_unknown_keys(j,
                        {"lvlm", "helper", "pipeline", "prompts_dir", "vocab_path",
                         "cooccurrence_path", "scenes_path", "records_path", "output_dir",
                         "seed", "log_level"},
                        "run config");
    if (j.contains("lvlm")) base.lvlm = backend_from_json(j.at("lvlm"), base.lvlm);
    if (j.contains("helper")) base.helper = backend_from_json(j.at("helper"), base.helper);
    if (j.contains("pipeline"))
        base.pipeline = pipeline_from_json(j.at("pipeline"), base.pipeline);
    base.prompts_dir = j.value("prompts_dir", base.prompts_dir);
    base.vocab_path = j.value("vocab_path", base.vocab_path);
    base.cooccurrence_path = j.value("cooccurrence_path", base.cooccurrence_path);
    base.scenes_path = j.value("scenes_path", base.scenes_path);
    base.records_path = j.value("records_path", base.records_path);
    base.output_dir = j.value("output_dir", base.output_dir);
    base.seed = j.value("seed", base.seed);
    base.log_level = j.value("log_level", base.log_level);
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON: " + std::string(e.what()));
    }
    return apply_config_json(j, std::move(base));
}

sim::HallucinationProfile resolve_profile(const RunConfig& cfg, const sim::Vocab& vocab) {
    sim::HallucinationProfile profile;
    if (cfg.lvlm.extra.contains("profile"))
        profile = sim::profile_from_json(cfg.lvlm.extra.at("profile"));
    if (profile.fabricated_pool.empty()) profile.fabricated_pool = vocab.fabricated_pool;
    if (profile.distractor_vocab.empty()) profile.distractor_vocab = vocab.nouns;
    if (profile.rng_seed == 0) profile.rng_seed = uint64_t(cfg.seed);
    return profile;
}

std::unique_ptr<chat::ChatBackend> make_backend(const chat::BackendConfig& backend,
                                                const RunConfig& cfg,
                                                const std::string& image_ref) {
    switch (backend.kind) {
        case chat::BackendKind::Http:
            return std::make_unique<chat::HttpBackend>(backend);
        case chat::BackendKind::Replay: {
            if (!backend.extra.contains("transcript_path"))
                throw ConfigError("replay backend requires transcript_path");
            std::string filter = backend.extra.value("backend_filter", "");
            return chat::ReplayBackend::from_transcript(
                backend.extra.at("transcript_path").get<std::string>(), filter);
        }
        case chat::BackendKind::Simulator: {
            std::string scene_path = backend.extra.value("scene_fixture", cfg.scenes_path);
            if (scene_path.empty())
                throw ConfigError("simulator backend requires a scene fixture path");
            std::vector<sim::SceneGraph> scenes = sim::load_scenes(scene_path);
            const sim::SceneGraph* chosen = nullptr;
            for (const auto& s : scenes) {
                if (s.image_id == image_ref) chosen = &s;
            }
            if (!chosen && scenes.size() == 1) chosen = &scenes.front();
            if (!chosen)
                throw ConfigError("no scene with image_id \"" + image_ref + "\" in " +
                                  scene_path);
            sim::Vocab vocab = sim::load_vocab(cfg.vocab_path);
            return std::make_unique<sim::SimulatorBackend>(*chosen,
                                                           resolve_profile(cfg, vocab));
        }
    }
    throw ConfigError("unsupported backend kind");
}

}  // namespace loopcheck::cli
