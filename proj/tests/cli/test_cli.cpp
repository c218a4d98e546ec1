#include "doctest.h"

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("auvctl_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const fs::path& dir, const std::string& args) {
    const fs::path log = dir / "cli_output.txt";
    const std::string cmd = std::string(AUVCTL_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    REQUIRE(it != header.end());
    return static_cast<std::size_t>(it - header.begin());
}

const json kShortTask = {{"task", {{"duration", 20.0}}}};

}  // namespace

TEST_CASE("simulate with the zero policy in calm water runs straight and reproducibly") {
    const fs::path dir = scratch("simulate");
    const fs::path cfg = write_config(dir, kShortTask);
    const Run a = run(dir, "simulate --scripted zero -c " + cfg.string() + " -o " + (dir / "a").string());
    REQUIRE(a.code == 0);
    REQUIRE(run(dir, "simulate --scripted zero -c " + cfg.string() + " -o " + (dir / "b").string()).code == 0);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
    CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));

    const auto rows = read_csv(dir / "a" / "trajectory.csv");
    REQUIRE(rows.size() > 100);
    const std::size_t yaw = column(rows[0], "yaw");
    const double yaw0 = std::stod(rows[1][yaw]);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(std::stod(rows[i][yaw]) - yaw0) < 1e-4);

    const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    CHECK(manifest["seeds"] == json::array({1}));
    CHECK(manifest.contains("build_version"));
}

TEST_CASE("missing policy file is a validation error naming the path") {
    const fs::path dir = scratch("missing_policy");
    const std::string missing = (dir / "nope" / "policy.bin").string();
    const fs::path cfg = write_config(dir, {{"policy", missing}});
    const Run r = run(dir, "simulate -c " + cfg.string() + " -o " + (dir / "out").string());
    CHECK(r.code == 1);
    CHECK(r.output.find(missing) != std::string::npos);
}

TEST_CASE("usage and validation errors exit with 1") {
    const fs::path dir = scratch("usage");
    CHECK(run(dir, "train --steps 0 -o " + (dir / "t").string()).code == 1);
    CHECK(run(dir, "compare --controllers \"\" --conditions calm -o " + (dir / "c").string()).code == 1);
    CHECK(run(dir, "compare --conditions calm -o " + (dir / "c").string()).code == 1);
    CHECK(run(dir, "frobnicate").code == 1);
    CHECK(run(dir, "simulate --controller lqr -o " + (dir / "s").string()).code == 1);
    CHECK(run(dir, "simulate --condition storm -o " + (dir / "s").string()).code == 1);
    const fs::path cfg = write_config(dir, {{"env", {{"unknown_knob", 1}}}});
    const Run r = run(dir, "simulate -c " + cfg.string());
    CHECK(r.code == 1);
    CHECK(r.output.find("env.unknown_knob") != std::string::npos);
}

TEST_CASE("controller and condition overrides reach the manifest") {
    const fs::path dir = scratch("overrides");
    const fs::path cfg = write_config(dir, kShortTask);
    REQUIRE(run(dir, "simulate --scripted zero --controller pid --condition ideal -c " + cfg.string() + " -o " +
                         (dir / "out").string())
                .code == 0);
    const json m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["config"]["controller"]["kind"] == "pid");
    CHECK(m["config"]["env"]["mode"] == "ideal");
}

TEST_CASE("compare emits one aggregated row per controller and condition") {
    const fs::path dir = scratch("compare");
    json j = kShortTask;
    j["llm"] = {{"reference_duration", 10.0}};
    j["probe"] = {{"trim_time", 2.0}};
    const fs::path cfg = write_config(dir, j);
    const Run r = run(dir, "compare --scripted guidance --controllers s_surface,pid --conditions ideal,calm --seeds 1,2 -c " +
                               cfg.string() + " -o " + (dir / "out").string());
    REQUIRE(r.code == 0);
    const auto rows = read_csv(dir / "out" / "compare.csv");
    REQUIRE(rows.size() == 5);
    const std::size_t episodes = column(rows[0], "episodes");
    const std::size_t dt_mean = column(rows[0], "dt_mean");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][episodes] == "2");
        if (rows[i][1] == "ideal") CHECK(std::stod(rows[i][dt_mean]) == 0.0);
    }
    CHECK(fs::exists(dir / "out" / "tracking_pid_calm.csv"));
    CHECK(fs::exists(dir / "out" / "tracking_s_surface_ideal.csv"));
}

TEST_CASE("optimize with fixture responses writes one record per iteration") {
    const fs::path dir = scratch("optimize");
    fs::create_directories(dir / "fixtures");
    std::ofstream(dir / "fixtures" / "01.txt") << "```adjustment\ntarget = reward\nlambda_energy_delta = 0.01\n```\n";
    std::ofstream(dir / "fixtures" / "02.txt") << "```adjustment\ntarget = controller\nzeta1_yaw_factor = 1.5\n```\n";
    json j = kShortTask;
    j["llm"] = {{"client", "fixture"},
                {"fixtures_dir", (dir / "fixtures").string()},
                {"budget", 2},
                {"eval_seeds", {1}},
                {"reference_duration", 10.0}};
    j["probe"] = {{"trim_time", 2.0}};
    const fs::path cfg = write_config(dir, j);
    const Run r = run(dir, "optimize --scripted guidance -c " + cfg.string() + " -o " + (dir / "out").string());
    REQUIRE(r.code == 0);
    const std::string records = slurp(dir / "out" / "records.jsonl");
    CHECK(std::count(records.begin(), records.end(), '\n') == 2);
    CHECK(fs::exists(dir / "out" / "final_params.json"));
    CHECK(fs::exists(dir / "out" / "archive" / "iter_001_prompt.txt"));
}

TEST_CASE("train resumed from a checkpoint matches an uninterrupted run") {
    const fs::path dir = scratch("train");
    json j = kShortTask;
    j["env"] = {{"mode", "ideal"}};
    j["rl"] = {{"total_steps", 1200}, {"warmup_steps", 300}, {"batch_size", 16}, {"hidden", 16}};
    const fs::path cfg = write_config(dir, j);
    REQUIRE(run(dir, "train -c " + cfg.string() + " -o " + (dir / "full").string()).code == 0);
    const Run paused = run(dir, "train --stop-after 500 -c " + cfg.string() + " -o " + (dir / "split").string());
    REQUIRE(paused.code == 0);
    CHECK(paused.output.find("paused") != std::string::npos);
    REQUIRE(run(dir, "train --resume -c " + cfg.string() + " -o " + (dir / "split").string()).code == 0);
    CHECK(slurp(dir / "full" / "policy.bin") == slurp(dir / "split" / "policy.bin"));
    CHECK(slurp(dir / "full" / "train_log.csv") == slurp(dir / "split" / "train_log.csv"));
    CHECK(run(dir, "train --resume -c " + cfg.string() + " -o " + (dir / "none").string()).code == 2);
}
