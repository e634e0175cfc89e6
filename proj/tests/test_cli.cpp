#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

// exercises the built binary end to end; LOOPCHECK_BIN is set by ctest

namespace {

namespace fs = std::filesystem;

const char* binary() { return std::getenv("LOOPCHECK_BIN"); }

int run_cli(const std::string& args) {
    std::string cmd = std::string(binary()) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string capture(const std::string& args) {
    fs::path tmp = fs::temp_directory_path() / "loopcheck_cli_out.txt";
    std::string cmd =
        std::string(binary()) + " " + args + " >" + tmp.string() + " 2>/dev/null";
    if (std::system(cmd.c_str()) == -1) return "";
    std::ifstream in(tmp);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

// a config pointing at the repository's prompts and data files
fs::path write_base_config(const fs::path& dir, const std::string& extra = "") {
    std::string src = LOOPCHECK_SOURCE_DIR;
    fs::create_directories(dir);
    fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << "{\n"
        << "  \"prompts_dir\": \"" << src << "/prompts\",\n"
        << "  \"vocab_path\": \"" << src << "/data/vocab.json\",\n"
        << "  \"cooccurrence_path\": \"" << src << "/data/cooccurrence.json\"";
    if (!extra.empty()) out << ",\n" << extra;
    out << "\n}\n";
    return path;
}

}  // namespace

TEST_CASE("cli usage and exit codes" * doctest::skip(binary() == nullptr)) {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("--no-such-flag") == 2);
    CHECK(run_cli("eval") == 2);   // missing subcommand
    CHECK(run_cli("sweep") == 2);  // missing required option
    CHECK(run_cli("run --instruction x --backend-kind http") == 1);  // no endpoint
}

TEST_CASE("cli fixture generation, eval, sweep and report" *
          doctest::skip(binary() == nullptr)) {
    fs::path dir = fs::temp_directory_path() / "loopcheck_cli_e2e";
    fs::remove_all(dir);
    fs::path config = write_base_config(dir);

    CHECK(run_cli("sim generate --scenes 4 --objects-per-scene 5 --questions-per-image 6 "
                  "--seed 5 --mme --out " +
                  (dir / "fix").string() + " --config " + config.string()) == 0);
    CHECK(fs::exists(dir / "fix" / "scenes.json"));
    CHECK(fs::exists(dir / "fix" / "records_random.jsonl"));
    CHECK(fs::exists(dir / "fix" / "records_popular.jsonl"));
    CHECK(fs::exists(dir / "fix" / "records_adversarial.jsonl"));
    CHECK(fs::exists(dir / "fix" / "records_mme.jsonl"));

    CHECK(run_cli("eval pope --records " + (dir / "fix/records_random.jsonl").string() +
                  " --scenes " + (dir / "fix/scenes.json").string() +
                  " --backend-kind simulator --seed 5 --out " + (dir / "ev").string() +
                  " --config " + config.string()) == 0);
    CHECK(fs::exists(dir / "ev" / "results.jsonl"));
    CHECK(fs::exists(dir / "ev" / "metrics.json"));
    CHECK(fs::exists(dir / "ev" / "events.jsonl"));

    std::string sweep = capture("sweep --results " + (dir / "ev/results.jsonl").string());
    // header plus ten grid rows
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 11);
    CHECK(sweep.find("0.9") != std::string::npos);

    CHECK(run_cli("eval mme --records " + (dir / "fix/records_mme.jsonl").string() +
                  " --scenes " + (dir / "fix/scenes.json").string() +
                  " --backend-kind simulator --seed 5 --out " + (dir / "mme").string() +
                  " --config " + config.string()) == 0);

    std::string report =
        capture("report --results " + (dir / "ev/results.jsonl").string() + " --stats");
    CHECK(report.find("mitigated") != std::string::npos);
    CHECK(report.find("±") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("cli single run over the simulator" * doctest::skip(binary() == nullptr)) {
    fs::path dir = fs::temp_directory_path() / "loopcheck_cli_run";
    fs::remove_all(dir);
    fs::path gen_config = write_base_config(dir);
    CHECK(run_cli("sim generate --scenes 1 --objects-per-scene 5 --questions-per-image 6 "
                  "--seed 9 --out " +
                  (dir / "fix").string() + " --config " + gen_config.string()) == 0);

    fs::path run_config = write_base_config(
        dir / "run",
        "  \"scenes_path\": \"" + (dir / "fix/scenes.json").string() +
            "\",\n  \"lvlm\": {\"kind\": \"simulator\"}");

    std::string out = capture("run --config " + run_config.string() +
                              " --instruction \"Please describe this image in detail.\" "
                              "--image sim-0000 --seed 3 --out " +
                              (dir / "out").string());
    CHECK(out.find("original:") != std::string::npos);
    CHECK(out.find("revised:") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "transcript.jsonl"));
    fs::remove_all(dir);
}
