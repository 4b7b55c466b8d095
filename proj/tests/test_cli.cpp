#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " SPIKING_REPLAY_CLI " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "spiking_replay_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json tiny_config(const fs::path& data, const fs::path& out) {
    return {{"seed", 3},
            {"data", {{"train", data.string()}, {"test_fraction", 0.25}}},
            {"network", {{"hidden", {12, 10}}}},
            {"train", {{"learning_rate", 0.01}, {"batch_size", 8}, {"surrogate_slope", 5.0}}},
            {"scenario",
             {{"kind", "class_incremental"},
              {"increments", {2}},
              {"lr_count", 12},
              {"layer_index", 1},
              {"codec", {{"kind", "chunk_threshold"}, {"ratio", 2}, {"threshold", 1}}},
              {"pretrain_epochs", 3},
              {"cl_epochs", 2}}},
            {"output", out.string()}};
}

fs::path write_config(const fs::path& dir, const json& cfg, const std::string& name = "config.json") {
    std::ofstream(dir / name) << cfg.dump(2);
    return dir / name;
}

fs::path tiny_data(const fs::path& dir) {
    const auto path = dir / "tiny.spks";
    REQUIRE(run("synth --out " + path.string() +
                " --classes 3 --scenarios 2 --samples 8 --timesteps 20 --neurons 16 --seed 5")
                .code == 0);
    return path;
}

}  // namespace

TEST_CASE("membench prints the default grid") {
    const auto r = run("membench");
    CHECK(r.code == 0);
    for (const char* cell :
         {"22.4 MB", "6.4 MB", "3.2 MB", "1.6 MB", "4.48 MB", "1.28 MB", "640 kB", "320 kB", "2.24 MB", "160 kB"})
        CHECK(r.out.find(cell) != std::string::npos);
}

TEST_CASE("membench CSV holds exact byte counts") {
    const auto dir = scratch("membench");
    REQUIRE(run("membench --codec all --out " + (dir / "grid.csv").string()).code == 0);
    const auto csv = slurp(dir / "grid.csv");
    CHECK(csv.find("chunk_threshold,1,2560,700,100,70000,22400000\n") != std::string::npos);
    CHECK(csv.find("chunk_threshold,10,2560,50,100,500,160000\n") != std::string::npos);
    CHECK(csv.find("aggregate_count,1,2560,50,100,350,112000\n") != std::string::npos);
    CHECK(fs::exists(dir / "grid.csv.manifest.json"));
}

TEST_CASE("usage and configuration errors exit with 2") {
    const auto dir = scratch("errors");
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("membench --ratios 3").code == 2);
    CHECK(run("pretrain").code == 2);
    CHECK(run("pretrain --config " + (dir / "missing.json").string()).code == 2);
    CHECK(run("convert-check " + (dir / "missing.spks").string()).code == 2);
    CHECK(run("--help").code == 0);

    auto cfg = tiny_config(dir / "missing.spks", dir / "out");
    CHECK(run("pretrain --config " + write_config(dir, cfg).string()).code == 2);

    const auto data = tiny_data(dir);
    cfg = tiny_config(data, dir / "out");
    cfg["scenario"]["codec"]["ratio"] = 3;
    CHECK(run("pretrain --config " + write_config(dir, cfg).string()).code == 2);
    cfg = tiny_config(data, dir / "out");
    cfg["scenario"]["increments"] = {7};
    CHECK(run("pretrain --config " + write_config(dir, cfg).string()).code == 2);
    cfg = tiny_config(data, dir / "out");
    CHECK(run("continual --config " + write_config(dir, cfg).string()).code == 2);  // no checkpoint yet
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run("pretrain --config " + (dir / "broken.json").string()).code == 2);
}

TEST_CASE("convert-check validates and rejects corrupted files") {
    const auto dir = scratch("check");
    const auto data = tiny_data(dir);
    const auto r = run("convert-check " + data.string());
    CHECK(r.code == 0);
    const auto report = json::parse(r.out);
    CHECK(report["samples"] == 48);
    CHECK(report["num_classes"] == 3);
    CHECK(report["valid"] == true);

    auto bytes = slurp(data);
    bytes[40] = static_cast<char>(bytes[40] ^ 0x10);
    std::ofstream(dir / "bad.spks", std::ios::binary) << bytes;
    CHECK(run("convert-check " + (dir / "bad.spks").string()).code == 2);
    std::ofstream(dir / "short.spks", std::ios::binary) << bytes.substr(0, 30);
    CHECK(run("convert-check " + (dir / "short.spks").string()).code == 2);
}

TEST_CASE("numeric failure during training exits with 3") {
    const auto dir = scratch("numeric");
    auto cfg = tiny_config(tiny_data(dir), dir / "out");
    cfg["network"]["init_gain"] = 1e308;
    CHECK(run("pretrain --config " + write_config(dir, cfg).string()).code == 3);
}

TEST_CASE("pretrain, continual and eval produce their artifacts") {
    const auto dir = scratch("pipeline");
    const auto data = tiny_data(dir);
    const auto config = write_config(dir, tiny_config(data, dir / "out"));

    REQUIRE(run("pretrain --config " + config.string()).code == 0);
    for (const char* f : {"pretrained.json", "pretrained.layer0.bin", "pretrain_metrics.csv", "pretrain_summary.json",
                          "pretrain.manifest.json"})
        CHECK(fs::exists(dir / "out" / f));
    CHECK(
        slurp(dir / "out" / "pretrain_metrics.csv").starts_with("epoch,phase,loss,acc_all,acc_old,acc_new,wall_ms\n"));

    const auto manifest = json::parse(slurp(dir / "out" / "pretrain.manifest.json"));
    CHECK(manifest["command"] == "pretrain");
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    for (const auto& p : manifest["outputs"]) CHECK(fs::exists(p.get<std::string>()));

    SUBCASE("rerun refuses to overwrite without --force") {
        CHECK(run("pretrain --config " + config.string()).code == 2);
        CHECK(run("pretrain --force --config " + config.string()).code == 0);
    }
    SUBCASE("dry run prints the plan and writes nothing") {
        const auto r = run("continual --dry-run --config " + config.string());
        REQUIRE(r.code == 0);
        const auto plan = json::parse(r.out);
        CHECK(plan["initial_replays"] == 12);
        CHECK(plan["initial_replay_bytes"] == 12 * 12 * 10 / 8);
        CHECK(plan["steps"].size() == 1);
        CHECK_FALSE(fs::exists(dir / "out" / "cl_report.csv"));
    }
    SUBCASE("continual writes the report, checkpoints and buffer") {
        REQUIRE(run("continual --config " + config.string()).code == 0);
        const auto csv = slurp(dir / "out" / "cl_report.csv");
        CHECK(csv.starts_with("step,epoch,acc_full,acc_old,acc_new,forgetting,replay_bytes,wall_ms\n"));
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
        for (const char* f : {"cl_summary.json", "step0.json", "replay_buffer.json", "replay_buffer.payload.bin",
                              "continual.manifest.json"})
            CHECK(fs::exists(dir / "out" / f));
        CHECK(fs::file_size(dir / "out" / "replay_buffer.payload.bin") == 12 * 12 * 10 / 8);

        const auto eval =
            run("eval --config " + config.string() + " --checkpoint " + (dir / "out" / "step0.json").string());
        REQUIRE(eval.code == 0);
        const auto report = json::parse(eval.out);
        CHECK(report["accuracy"].get<double>() >= 0.0);
        CHECK(report["per_class"].size() == 3);
    }
    SUBCASE("a checkpoint of the wrong shape is rejected") {
        auto cfg = tiny_config(data, dir / "out2");
        cfg["checkpoint"] = (dir / "out" / "pretrained.json").string();
        const auto other = dir / "other.spks";
        REQUIRE(run("synth --out " + other.string() + " --classes 3 --samples 4 --timesteps 20 --neurons 12").code ==
                0);
        cfg["data"]["train"] = other.string();
        CHECK(run("continual --config " + write_config(dir, cfg, "other.json").string()).code == 2);
    }
}

TEST_CASE("reruns with the same config and seed give byte-identical CSVs") {
    const auto dir = scratch("determinism");
    const auto data = tiny_data(dir);
    std::string metrics, report;
    for (const char* name : {"a", "b", "c"}) {
        const auto config = write_config(dir, tiny_config(data, dir / name), std::string(name) + ".json");
        const std::string env = std::string(name) == "c" ? "SPIKING_REPLAY_THREADS=3" : "";
        REQUIRE(run("pretrain --config " + config.string(), env).code == 0);
        REQUIRE(run("continual --config " + config.string(), env).code == 0);
        const auto m = slurp(dir / name / "pretrain_metrics.csv");
        const auto r = slurp(dir / name / "cl_report.csv");
        if (metrics.empty()) {
            metrics = m;
            report = r;
        } else {
            CHECK(m == metrics);
            CHECK(r == report);
        }
    }
    CHECK(slurp(dir / "a" / "pretrained.layer1.bin") == slurp(dir / "c" / "pretrained.layer1.bin"));

    const auto other = write_config(dir, tiny_config(data, dir / "d"), "d.json");
    REQUIRE(run("pretrain --seed 4 --config " + other.string()).code == 0);
    CHECK(slurp(dir / "d" / "pretrain_metrics.csv") != metrics);
}

TEST_CASE("synth with a test fraction writes both splits") {
    const auto dir = scratch("synth");
    REQUIRE(run("synth --out " + (dir / "s.spks").string() + " --samples 10 --test-fraction 0.2 --seed 2").code == 0);
    CHECK(fs::exists(dir / "s.spks"));
    CHECK(fs::exists(dir / "s.test.spks"));
    CHECK(json::parse(run("convert-check " + (dir / "s.test.spks").string()).out)["samples"] == 16);
    CHECK(run("synth --out " + (dir / "s.spks").string() + " --samples 10 --test-fraction 0.2 --seed 2").code == 2);
}
