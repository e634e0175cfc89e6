#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "loopcheck/chat.hpp"
#include "loopcheck/pipeline.hpp"
#include "loopcheck/simulator.hpp"

namespace loopcheck::cli {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Full run configuration. Precedence: command-line flags over config
/// file over these defaults.
struct RunConfig {
    chat::BackendConfig lvlm;
    chat::BackendConfig helper;
    pipe::PipelineConfig pipeline;
    std::string prompts_dir = "prompts";
    std::string vocab_path = "data/vocab.json";
    std::string cooccurrence_path = "data/cooccurrence.json";
    std::string scenes_path;
    std::string records_path;
    std::string output_dir = "out";
    int64_t seed = 0;
    std::string log_level = "info";
};

chat::BackendConfig backend_from_json(const nlohmann::json& j, chat::BackendConfig base = {});
pipe::PipelineConfig pipeline_from_json(const nlohmann::json& j,
                                        pipe::PipelineConfig base = {});

/// Applies a config file on top of defaults. Unknown keys are rejected so
/// typos do not silently fall back to defaults.
RunConfig apply_config_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Simulator profile from config, with pool defaults taken from the vocab
/// file when the config leaves them empty.
sim::HallucinationProfile resolve_profile(const RunConfig& cfg, const sim::Vocab& vocab);

/// Builds the configured backend. Simulator kind reads the scene fixture
/// and picks the scene matching image_ref (or the only one).
std::unique_ptr<chat::ChatBackend> make_backend(const chat::BackendConfig& backend,
                                                const RunConfig& cfg,
                                                const std::string& image_ref);

}  // namespace loopcheck::cli
