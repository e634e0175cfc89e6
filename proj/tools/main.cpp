// loopcheck CLI: probe vision-language chat backends for object
// hallucinations with logically linked question pairs, benchmark the
// detector, and generate simulator fixtures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopcheck/eval.hpp"
#include "loopcheck/pipeline.hpp"
#include "loopcheck/prompts.hpp"
#include "loopcheck/runconfig.hpp"
#include "loopcheck/simulator.hpp"
#include "loopcheck/transcript.hpp"

namespace fs = std::filesystem;
using namespace loopcheck;

namespace {

struct Overrides {
    std::string config_path;
    double lambda = -1.0;
    int min_attributes = -1;
    std::string question_style;
    int64_t seed = std::numeric_limits<int64_t>::min();
    std::string backend_kind;
    std::string prompts_dir;
    std::string output_dir;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "run configuration JSON");
    cmd->add_option("--lambda", ov.lambda, "loop-rate threshold in [0,1]");
    cmd->add_option("--min-attributes", ov.min_attributes, "attribute stopping bound");
    cmd->add_option("--question-style", ov.question_style, "full or simple");
    cmd->add_option("--seed", ov.seed, "run seed");
    cmd->add_option("--backend-kind", ov.backend_kind, "http, simulator or replay");
    cmd->add_option("--prompts-dir", ov.prompts_dir, "prompt template directory");
    cmd->add_option("--out", ov.output_dir, "output directory");
}

cli::RunConfig resolve_config(const Overrides& ov) {
    cli::RunConfig cfg;
    if (!ov.config_path.empty()) cfg = cli::load_config(ov.config_path, std::move(cfg));
    // flags win over the file
    if (ov.lambda >= 0.0) cfg.pipeline.lambda_threshold = ov.lambda;
    if (ov.min_attributes >= 1) cfg.pipeline.min_attributes = ov.min_attributes;
    if (!ov.question_style.empty())
        cfg.pipeline.question_style = pipe::question_style_from_string(ov.question_style);
    if (ov.seed != std::numeric_limits<int64_t>::min()) cfg.seed = ov.seed;
    if (!ov.backend_kind.empty())
        cfg.lvlm.kind = chat::backend_kind_from_string(ov.backend_kind);
    if (!ov.prompts_dir.empty()) cfg.prompts_dir = ov.prompts_dir;
    if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
    cfg.pipeline.seed = cfg.seed;
    return cfg;
}

chat::ImageAttachment load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cli::ConfigError("cannot open image: " + path);
    chat::ImageAttachment img;
    img.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    std::string ext = fs::path(path).extension().string();
    if (ext == ".png")
        img.media_type = "image/png";
    else if (ext == ".jpg" || ext == ".jpeg")
        img.media_type = "image/jpeg";
    else if (ext == ".webp")
        img.media_type = "image/webp";
    else
        img.media_type = "application/octet-stream";
    return img;
}

std::unique_ptr<pipe::Helper> make_helper(const cli::RunConfig& cfg,
                                          const prompts::PromptRegistry& registry,
                                          std::unique_ptr<chat::ChatBackend>& helper_backend) {
    if (cfg.pipeline.helper_mode == pipe::HelperMode::RuleBased) {
        sim::Vocab vocab = sim::load_vocab(cfg.vocab_path);
        return std::make_unique<pipe::RuleBasedHelper>(text::Lexicon(vocab.nouns));
    }
    helper_backend = cli::make_backend(cfg.helper, cfg, "");
    chat::SamplingParams params;
    params.seed = cfg.seed;
    return std::make_unique<pipe::ModelHelper>(*helper_backend, registry, params);
}

int cmd_run(const Overrides& ov, const std::string& instruction, const std::string& image_path) {
    cli::RunConfig cfg = resolve_config(ov);
    prompts::PromptRegistry registry = prompts::PromptRegistry::load(cfg.prompts_dir);

    std::optional<chat::ImageAttachment> image;
    std::string image_ref;
    if (!image_path.empty()) {
        if (cfg.lvlm.kind == chat::BackendKind::Simulator) {
            image_ref = image_path;  // scene id, not a file
        } else {
            image = load_image(image_path);
            image_ref = image_path;
        }
    }

    std::unique_ptr<chat::ChatBackend> lvlm = cli::make_backend(cfg.lvlm, cfg, image_ref);
    std::unique_ptr<chat::ChatBackend> helper_backend;
    std::unique_ptr<pipe::Helper> helper = make_helper(cfg, registry, helper_backend);

    pipe::Pipeline pipeline(*lvlm, *helper, registry, cfg.pipeline);

    fs::create_directories(cfg.output_dir);
    store::TranscriptWriter writer(fs::path(cfg.output_dir) / "transcript.jsonl");
    pipe::PipelineTranscript t = pipeline.run(instruction, image_ref, image, &writer);
    writer.close();

    std::cout << "run " << t.run_id << (t.short_circuited ? " (short-circuited)" : "") << "\n";
    for (const auto& obj : t.objects) {
        if (!obj.verdict) continue;
        std::cout << "  " << obj.name << ": score " << obj.verdict->score.closed_count << "/"
                  << obj.verdict->score.n_questions << " -> "
                  << core::to_string(obj.verdict->kind) << "\n";
    }
    std::cout << "original: " << t.original_response << "\n";
    std::cout << "revised:  " << t.revised_response << "\n";
    std::cout << "transcript: " << (fs::path(cfg.output_dir) / "transcript.jsonl").string()
              << "\n";
    return 0;
}

struct EvalContext {
    cli::RunConfig cfg;
    prompts::PromptRegistry registry;
    std::vector<eval::EvalRecord> records;
    std::map<std::string, sim::SceneGraph> scenes;
    std::map<std::string, std::unique_ptr<chat::ChatBackend>> backends;
    std::unique_ptr<chat::ChatBackend> shared_backend;
    std::unique_ptr<chat::ChatBackend> helper_backend;
    std::unique_ptr<pipe::Helper> helper;
};

EvalContext prepare_eval(const Overrides& ov, const std::string& records_path,
                         const std::string& scenes_path) {
    cli::RunConfig cfg = resolve_config(ov);
    if (!records_path.empty()) cfg.records_path = records_path;
    if (!scenes_path.empty()) cfg.scenes_path = scenes_path;
    if (cfg.records_path.empty()) throw cli::ConfigError("eval requires --records");

    prompts::PromptRegistry registry = prompts::PromptRegistry::load(cfg.prompts_dir);
    EvalContext ctx{std::move(cfg), std::move(registry)};
    ctx.records = eval::load_records(ctx.cfg.records_path);
    ctx.helper = make_helper(ctx.cfg, ctx.registry, ctx.helper_backend);

    if (ctx.cfg.lvlm.kind == chat::BackendKind::Simulator) {
        if (ctx.cfg.scenes_path.empty())
            throw cli::ConfigError("simulator eval requires --scenes");
        sim::Vocab vocab = sim::load_vocab(ctx.cfg.vocab_path);
        sim::HallucinationProfile profile = cli::resolve_profile(ctx.cfg, vocab);
        for (auto& scene : sim::load_scenes(ctx.cfg.scenes_path)) {
            std::string id = scene.image_id;
            ctx.scenes[id] = scene;
            ctx.backends[id] =
                std::make_unique<sim::SimulatorBackend>(std::move(scene), profile);
        }
    } else {
        ctx.shared_backend = cli::make_backend(ctx.cfg.lvlm, ctx.cfg, "");
    }
    return ctx;
}

std::vector<eval::RecordResult> execute_eval(EvalContext& ctx,
                                             store::TranscriptWriter* sink) {
    auto backend_for = [&](const eval::EvalRecord& r) -> chat::ChatBackend& {
        if (ctx.shared_backend) return *ctx.shared_backend;
        auto it = ctx.backends.find(r.image_id);
        if (it == ctx.backends.end())
            throw cli::ConfigError("no scene for image_id " + r.image_id);
        return *it->second;
    };
    auto oracle = [&](const eval::EvalRecord& r,
                      const std::string& examinee) -> std::optional<bool> {
        auto it = ctx.scenes.find(r.image_id);
        if (it == ctx.scenes.end()) return std::nullopt;
        return it->second.contains(examinee);
    };
    pipe::PipelineConfig pcfg = ctx.cfg.pipeline;
    pcfg.seed = ctx.cfg.seed;
    return pipe::run_benchmark(ctx.records, backend_for, *ctx.helper, ctx.registry, pcfg,
                               oracle, sink);
}

int cmd_eval_pope(const Overrides& ov, const std::string& records_path,
                  const std::string& scenes_path) {
    EvalContext ctx = prepare_eval(ov, records_path, scenes_path);
    fs::create_directories(ctx.cfg.output_dir);
    store::TranscriptWriter writer(fs::path(ctx.cfg.output_dir) / "events.jsonl");
    std::vector<eval::RecordResult> rows = execute_eval(ctx, &writer);
    writer.close();
    eval::save_results(rows, fs::path(ctx.cfg.output_dir) / "results.jsonl");

    std::vector<eval::Answer> vanilla, mitigated;
    for (const auto& r : rows) {
        vanilla.push_back(r.original_pred);
        mitigated.push_back(r.mitigated_pred);
    }
    eval::MetricsReport vm = eval::evaluate_pope(vanilla, ctx.records);
    eval::MetricsReport mm = eval::evaluate_pope(mitigated, ctx.records);
    std::cout << "== vanilla ==\n" << eval::format_table(vm);
    std::cout << "== mitigated ==\n" << eval::format_table(mm);
    {
        std::ofstream out(fs::path(ctx.cfg.output_dir) / "metrics.json");
        out << nlohmann::json{{"vanilla", eval::to_json(vm)},
                              {"mitigated", eval::to_json(mm)}}
                   .dump(2)
            << "\n";
    }
    std::cout << "results: " << (fs::path(ctx.cfg.output_dir) / "results.jsonl").string()
              << "\n";
    return 0;
}

std::pair<eval::Rational, eval::Rational> mme_from_rows(
    const std::vector<eval::RecordResult>& rows, bool mitigated) {
    std::map<std::string, std::vector<bool>> per_image;
    for (const auto& r : rows) {
        eval::Answer pred = mitigated ? r.mitigated_pred : r.original_pred;
        bool truth = r.record.label == eval::Label::Yes;
        bool correct = (pred == eval::Answer::Yes) == truth && pred != eval::Answer::Unparseable;
        per_image[r.record.image_id].push_back(correct);
    }
    std::vector<std::pair<bool, bool>> pairs;
    for (const auto& [id, v] : per_image) {
        if (v.size() != 2)
            throw eval::MalformedPair("image " + id + " has " + std::to_string(v.size()) +
                                      " questions, expected 2");
        pairs.emplace_back(v[0], v[1]);
    }
    return eval::evaluate_mme(pairs);
}

int cmd_eval_mme(const Overrides& ov, const std::string& records_path,
                 const std::string& scenes_path) {
    EvalContext ctx = prepare_eval(ov, records_path, scenes_path);
    fs::create_directories(ctx.cfg.output_dir);
    store::TranscriptWriter writer(fs::path(ctx.cfg.output_dir) / "events.jsonl");
    std::vector<eval::RecordResult> rows = execute_eval(ctx, &writer);
    writer.close();
    eval::save_results(rows, fs::path(ctx.cfg.output_dir) / "results.jsonl");

    auto [vacc, vplus] = mme_from_rows(rows, false);
    auto [macc, mplus] = mme_from_rows(rows, true);
    std::cout << "vanilla   acc/acc+: " << vacc.percent() << " / " << vplus.percent() << "\n";
    std::cout << "mitigated acc/acc+: " << macc.percent() << " / " << mplus.percent() << "\n";
    return 0;
}

int cmd_sweep(const std::string& results_path, const std::string& out_path) {
    std::vector<eval::RecordResult> rows = eval::load_results(results_path);
    std::vector<eval::SweepPoint> points =
        eval::sweep_lambda(rows, eval::default_lambda_grid());
    std::cout << eval::format_sweep_table(points);
    if (!out_path.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : points)
            arr.push_back({{"lambda", p.threshold}, {"metrics", eval::to_json(p.metrics)}});
        std::ofstream out(out_path);
        out << arr.dump(2) << "\n";
    }
    return 0;
}

int cmd_sim_generate(const Overrides& ov, int n_scenes, int objects_per_scene,
                     int questions_per_image, bool with_mme) {
    cli::RunConfig cfg = resolve_config(ov);
    uint64_t seed = uint64_t(cfg.seed);
    sim::Vocab vocab = sim::load_vocab(cfg.vocab_path);
    sim::CooccurrenceTable cooc = sim::load_cooccurrence(cfg.cooccurrence_path);
    sim::FixtureSet fixtures = sim::generate_fixtures(n_scenes, objects_per_scene,
                                                      questions_per_image, vocab, cooc, seed);
    fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);
    sim::save_scenes(fixtures.scenes, out_dir / "scenes.json");
    eval::save_records(fixtures.random_records, out_dir / "records_random.jsonl");
    eval::save_records(fixtures.popular_records, out_dir / "records_popular.jsonl");
    eval::save_records(fixtures.adversarial_records, out_dir / "records_adversarial.jsonl");
    std::cout << "scenes: " << fixtures.scenes.size() << "\n"
              << "records per setting: " << fixtures.random_records.size() << "\n";
    if (with_mme) {
        auto mme = sim::generate_mme_records(fixtures.scenes, vocab, seed + 1);
        eval::save_records(mme, out_dir / "records_mme.jsonl");
        std::cout << "mme records: " << mme.size() << "\n";
    }
    std::cout << "wrote fixtures to " << out_dir.string() << "\n";
    return 0;
}

int cmd_report(const std::string& results_path, const std::string& metrics_path, bool stats) {
    if (!metrics_path.empty()) {
        std::ifstream in(metrics_path);
        if (!in) throw cli::ConfigError("cannot open metrics file: " + metrics_path);
        nlohmann::json j;
        in >> j;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (results_path.empty()) throw cli::ConfigError("report needs --results or --metrics");
    std::vector<eval::RecordResult> rows = eval::load_results(results_path);
    std::vector<eval::EvalRecord> records;
    std::vector<eval::Answer> vanilla, mitigated;
    for (const auto& r : rows) {
        records.push_back(r.record);
        vanilla.push_back(r.original_pred);
        mitigated.push_back(r.mitigated_pred);
    }
    std::cout << "== vanilla ==\n" << eval::format_table(eval::evaluate_pope(vanilla, records));
    std::cout << "== mitigated ==\n"
              << eval::format_table(eval::evaluate_pope(mitigated, records));
    if (stats) {
        std::vector<eval::ObjectCountSample> samples;
        for (const auto& r : rows) {
            if (r.examinee.empty() || !r.oracle_present) continue;
            samples.push_back({r.attributes_gathered, *r.oracle_present});
        }
        eval::AttributeCountStats s = eval::attribute_count_stats(samples);
        std::cout << "attributes (existent):     " << eval::format_class_stats(s.existent)
                  << "\n";
        std::cout << "attributes (hallucinated): " << eval::format_class_stats(s.hallucinated)
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"logical-loop hallucination detector for vision-language chat backends"};
    app.require_subcommand(1);

    Overrides ov;
    std::string instruction, image_path, records_path, scenes_path, results_path,
        metrics_path, out_path;
    int n_scenes = 50, objects_per_scene = 5, questions_per_image = 6;
    bool with_mme = false, stats = false;

    CLI::App* run_cmd = app.add_subcommand("run", "run one instruction through the pipeline");
    add_common_flags(run_cmd, ov);
    run_cmd->add_option("--instruction", instruction, "instruction or question")->required();
    run_cmd->add_option("--image", image_path, "image file (http) or scene id (simulator)");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a benchmark fixture");
    eval_cmd->require_subcommand(1);
    CLI::App* pope_cmd = eval_cmd->add_subcommand("pope", "POPE-style yes/no benchmark");
    add_common_flags(pope_cmd, ov);
    pope_cmd->add_option("--records", records_path, "records JSONL");
    pope_cmd->add_option("--scenes", scenes_path, "scene fixture JSON");
    CLI::App* mme_cmd = eval_cmd->add_subcommand("mme", "existence pairs, acc and acc+");
    add_common_flags(mme_cmd, ov);
    mme_cmd->add_option("--records", records_path, "records JSONL");
    mme_cmd->add_option("--scenes", scenes_path, "scene fixture JSON");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "threshold sweep over stored scores");
    sweep_cmd->add_option("--results", results_path, "results JSONL from an eval run")
        ->required();
    sweep_cmd->add_option("--out", out_path, "write the sweep as JSON");

    CLI::App* sim_cmd = app.add_subcommand("sim", "simulator utilities");
    sim_cmd->require_subcommand(1);
    CLI::App* gen_cmd = sim_cmd->add_subcommand("generate", "generate scenes and records");
    add_common_flags(gen_cmd, ov);
    gen_cmd->add_option("--scenes", n_scenes, "number of scenes");
    gen_cmd->add_option("--objects-per-scene", objects_per_scene, "objects per scene");
    gen_cmd->add_option("--questions-per-image", questions_per_image, "questions per image");
    gen_cmd->add_flag("--mme", with_mme, "also generate existence pairs");

    CLI::App* report_cmd = app.add_subcommand("report", "render results or metrics");
    report_cmd->add_option("--results", results_path, "results JSONL");
    report_cmd->add_option("--metrics", metrics_path, "metrics JSON");
    report_cmd->add_flag("--stats", stats, "attribute-count statistics by oracle class");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(ov, instruction, image_path);
        if (pope_cmd->parsed()) return cmd_eval_pope(ov, records_path, scenes_path);
        if (mme_cmd->parsed()) return cmd_eval_mme(ov, records_path, scenes_path);
        if (sweep_cmd->parsed()) return cmd_sweep(results_path, out_path);
        if (gen_cmd->parsed())
            return cmd_sim_generate(ov, n_scenes, objects_per_scene, questions_per_image,
                                    with_mme);
        if (report_cmd->parsed()) return cmd_report(results_path, metrics_path, stats);
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
