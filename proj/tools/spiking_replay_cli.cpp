#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spiking_replay/checkpoint.hpp"
#include "spiking_replay/errors.hpp"
#include "spiking_replay/experiment.hpp"
#include "spiking_replay/rng.hpp"
#include "spiking_replay/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spiking_replay;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
    bool force = false;
};

std::size_t resolve_threads(const CommonOptions& opts, std::size_t from_config) {
    if (opts.threads) return std::max<std::size_t>(1, *opts.threads);
    if (const char* env = std::getenv("SPIKING_REPLAY_THREADS"); env && *env) {
        try {
            return std::max<std::size_t>(1, std::stoul(env));
        } catch (const std::exception&) {
            throw UsageError(std::string("SPIKING_REPLAY_THREADS is not a number: ") + env);
        }
    }
    return std::max<std::size_t>(1, from_config);
}

/// Refuses to clobber a previous run of the same command unless --force.
void guard_manifest(const fs::path& manifest, const std::string& hash, bool force) {
    if (!fs::exists(manifest) || force) return;
    std::string previous;
    try {
        std::ifstream in(manifest);
        previous = json::parse(in).value("config_hash", std::string());
    } catch (const std::exception&) {
    }
    const std::string why = previous == hash ? "a run with the same config hash " + hash + " already exists"
                                             : "a previous run (config hash " + previous + ") exists";
    throw UsageError(why + " at " + manifest.string() + "; pass --force to overwrite");
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

template <typename Fn>
void write_text(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
}

void finish_manifest(RunManifest& manifest, const fs::path& path) {
    manifest.finished_at = utc_timestamp();
    write_json(path, manifest.to_json());
}

std::string human_bytes(std::size_t bytes) {
    char buf[32];
    if (bytes >= 1'000'000)
        std::snprintf(buf, sizeof buf, "%g MB", double(bytes) / 1e6);
    else if (bytes >= 1'000)
        std::snprintf(buf, sizeof buf, "%g kB", double(bytes) / 1e3);
    else
        std::snprintf(buf, sizeof buf, "%zu B", bytes);
    return buf;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
    SynthSpec spec;
    double test_fraction = 0.0;
};

int cmd_synth(const SynthOptions& o, const CommonOptions& common) {
    if (common.out.empty()) throw UsageError("synth: --out is required");
    const std::uint64_t seed = common.seed.value_or(0);
    const auto& s = o.spec;
    const json params = {{"classes", s.classes},
                         {"scenarios", s.scenarios},
                         {"samples_per_group", s.samples_per_group},
                         {"timesteps", s.timesteps},
                         {"neurons", s.neurons},
                         {"segments", s.segments},
                         {"active_fraction", s.active_fraction},
                         {"rate_active", s.rate_active},
                         {"rate_background", s.rate_background},
                         {"scenario_time_offset", s.scenario_time_offset},
                         {"scenario_neuron_shift", s.scenario_neuron_shift},
                         {"jitter", s.jitter},
                         {"test_fraction", o.test_fraction},
                         {"seed", seed}};

    const fs::path out = common.out;
    const fs::path manifest_path = fs::path(out).concat(".manifest.json");
    RunManifest manifest{"synth", config_hash(params), seed};
    manifest.started_at = utc_timestamp();
    guard_manifest(manifest_path, manifest.config_hash, common.force);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());

    auto set = generate_spikeset(s, seed);
    if (o.test_fraction > 0.0) {
        auto split = stratified_split(set, o.test_fraction, substream_seed(seed, "split"));
        fs::path test_path = out;
        test_path.replace_extension(".test" + out.extension().string());
        save_spikeset(split.train, out);
        save_spikeset(split.test, test_path);
        manifest.outputs = {out, test_path};
        std::cout << "wrote " << split.train.size() << " training samples to " << out.string() << " and "
                  << split.test.size() << " test samples to " << test_path.string() << '\n';
    } else {
        save_spikeset(set, out);
        manifest.outputs = {out};
        std::cout << "wrote " << set.size() << " samples to " << out.string() << '\n';
    }
    manifest.outputs.push_back(manifest_path);
    finish_manifest(manifest, manifest_path);
    return 0;
}

// ---------------------------------------------------------------- experiment setup

struct Loaded {
    ExperimentConfig cfg;
    Datasets data;
    std::string hash;
};

Loaded load_experiment(const std::string& config_path, const CommonOptions& common) {
    if (config_path.empty()) throw UsageError("--config is required");
    if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
    auto cfg = load_experiment_config(config_path);
    if (common.seed) {
        cfg.settings.seed = *common.seed;
        cfg.raw["seed"] = *common.seed;
    }
    if (!common.out.empty()) cfg.output_dir = common.out;
    cfg.settings.threads = resolve_threads(common, cfg.settings.threads);
    if (!fs::exists(cfg.train_path)) throw UsageError("dataset not found: " + cfg.train_path.string());
    if (cfg.test_path && !fs::exists(*cfg.test_path)) throw UsageError("dataset not found: " + cfg.test_path->string());
    auto data = load_datasets(cfg);
    if (data.train.neurons() != data.test.neurons() || data.train.timesteps() != data.test.timesteps() ||
        data.train.num_classes() != data.test.num_classes())
        throw UsageError("training and test sets differ in shape");
    bind_dataset_shape(cfg, data.train);
    const auto hash = config_hash(cfg.raw);
    return {std::move(cfg), std::move(data), hash};
}

Network load_pretrained(const ExperimentConfig& cfg, const std::optional<std::string>& override_path,
                        const SpikeSet& data) {
    const fs::path path = override_path ? fs::path(*override_path) : cfg.pretrained_checkpoint();
    if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path.string() + " (run `pretrain` first)");
    auto net = load_checkpoint(path).network;
    if (net.input_size() != data.neurons())
        throw UsageError("checkpoint expects " + std::to_string(net.input_size()) + " input neurons, dataset has " +
                         std::to_string(data.neurons()));
    if (net.output_size() != data.num_classes())
        throw UsageError("checkpoint has " + std::to_string(net.output_size()) + " outputs, dataset has " +
                         std::to_string(data.num_classes()) + " classes");
    return net;
}

double accuracy_or_zero(const SpikeSet& set, const std::vector<Label>& predictions, const SampleFilter& filter) {
    if (set.indices(filter).empty()) return 0.0;
    return accuracy_of(set, predictions, filter);
}

// ---------------------------------------------------------------- pretrain

int cmd_pretrain(const std::string& config_path, const CommonOptions& common) {
    auto [cfg, data, hash] = load_experiment(config_path, common);
    const auto& sc = cfg.scenario;
    sc.validate(data.train, cfg.settings.shape.sizes.size() - 1);

    const fs::path dir = cfg.output_dir;
    const fs::path manifest_path = dir / "pretrain.manifest.json";
    RunManifest manifest{"pretrain", hash, cfg.settings.seed};
    manifest.started_at = utc_timestamp();
    guard_manifest(manifest_path, hash, common.force);
    fs::create_directories(dir);

    const auto old_filter = sc.pretrain_filter(data.train);
    std::set<Label> unseen;
    for (auto id : sc.increments) unseen.insert(id);
    const auto held_out = sc.kind == ProtocolKind::sample_incremental ? SampleFilter::of_scenarios(unseen)
                                                                      : SampleFilter::of_classes(unseen);

    std::vector<PretrainEpochRow> rows;
    const auto start = std::chrono::steady_clock::now();
    auto on_epoch = [&](const EpochMetrics& m, const Network& net) {
        const auto predictions = predict_all(net, data.test, cfg.settings.threads);
        PretrainEpochRow row;
        row.epoch = m.epoch;
        row.loss = m.loss;
        row.acc_all = accuracy_or_zero(data.test, predictions, {});
        row.acc_old = accuracy_or_zero(data.test, predictions, old_filter);
        row.acc_new = accuracy_or_zero(data.test, predictions, held_out);
        if (cfg.settings.record_wall_time)
            row.wall_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(row);
        std::cerr << "epoch " << m.epoch << "  loss " << m.loss << "  acc_old " << row.acc_old << '\n';
    };
    const auto result = pretrain(make_network(cfg.settings.shape, cfg.settings.seed), data.train, data.test, sc,
                                 cfg.settings, on_epoch);

    const fs::path ckpt = cfg.pretrained_checkpoint();
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    manifest.outputs = save_checkpoint({result.network, cfg.settings.seed}, ckpt);
    write_text(dir / "pretrain_metrics.csv", [&](std::ostream& out) { write_metrics_csv(out, rows); });
    json summary = {{"acc_old", result.acc_old},
                    {"acc_full", result.acc_full},
                    {"epochs", result.history.size()},
                    {"sizes", cfg.settings.shape.sizes},
                    {"train_samples", data.train.indices(old_filter).size()},
                    {"test_samples", data.test.size()}};
    write_json(dir / "pretrain_summary.json", summary);
    manifest.outputs.push_back(dir / "pretrain_metrics.csv");
    manifest.outputs.push_back(dir / "pretrain_summary.json");
    manifest.outputs.push_back(manifest_path);
    finish_manifest(manifest, manifest_path);
    std::cout << "pretrained: acc_old " << result.acc_old << ", acc_full " << result.acc_full << '\n';
    return 0;
}

// ---------------------------------------------------------------- continual

int cmd_continual(const std::string& config_path, const std::optional<std::string>& checkpoint, bool dry_run,
                  const CommonOptions& common) {
    auto [cfg, data, hash] = load_experiment(config_path, common);
    const auto& sc = cfg.scenario;

    if (dry_run) {
        sc.validate(data.train, cfg.settings.shape.sizes.size() - 1);
        auto plan = plan_json(plan_protocol(sc, cfg.settings, data.train, data.test), sc);
        plan["config_hash"] = hash;
        plan["sizes"] = cfg.settings.shape.sizes;
        plan["train_samples"] = data.train.size();
        plan["test_samples"] = data.test.size();
        plan["checkpoint"] = (checkpoint ? fs::path(*checkpoint) : cfg.pretrained_checkpoint()).string();
        plan["output"] = cfg.output_dir.string();
        std::cout << plan.dump(2) << '\n';
        return 0;
    }

    auto net = load_pretrained(cfg, checkpoint, data.train);
    const fs::path dir = cfg.output_dir;
    const fs::path manifest_path = dir / "continual.manifest.json";
    RunManifest manifest{"continual", hash, cfg.settings.seed};
    manifest.started_at = utc_timestamp();
    guard_manifest(manifest_path, hash, common.force);
    fs::create_directories(dir);

    auto on_step = [&](std::size_t step, const ContinualState& state) {
        const auto files =
            save_checkpoint({state.network, cfg.settings.seed}, dir / ("step" + std::to_string(step) + ".json"));
        manifest.outputs.insert(manifest.outputs.end(), files.begin(), files.end());
        std::cerr << "step " << step << " done\n";
    };
    const auto result = run_protocol(sc, cfg.settings, data.train, data.test, std::move(net), on_step);

    write_text(dir / "cl_report.csv", [&](std::ostream& out) { write_cl_report_csv(out, result.report.rows); });
    write_json(dir / "cl_summary.json", cl_summary_json(result.report, sc));
    const auto buffer_files = save_buffer(result.state.buffer, dir / "replay_buffer.json");
    manifest.outputs.push_back(dir / "cl_report.csv");
    manifest.outputs.push_back(dir / "cl_summary.json");
    manifest.outputs.insert(manifest.outputs.end(), buffer_files.begin(), buffer_files.end());
    manifest.outputs.push_back(manifest_path);
    finish_manifest(manifest, manifest_path);

    for (const auto& s : result.report.steps)
        std::cout << "step " << s.step << " (+" << s.increment << "): acc_old " << s.acc_old_before << " -> "
                  << s.acc_old_after << ", acc_new " << s.acc_new_before << " -> " << s.acc_new_after << ", forgetting "
                  << s.forgetting << ", replay " << human_bytes(s.replay_bytes) << '\n';
    return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& config_path, const std::optional<std::string>& checkpoint,
             const CommonOptions& common) {
    auto [cfg, data, hash] = load_experiment(config_path, common);
    const fs::path ckpt_path = checkpoint ? fs::path(*checkpoint) : cfg.pretrained_checkpoint();
    const auto net = load_pretrained(cfg, checkpoint, data.train);

    const auto predictions = predict_all(net, data.test, cfg.settings.threads);
    json report = {{"checkpoint", ckpt_path.string()},
                   {"samples", data.test.size()},
                   {"accuracy", accuracy_or_zero(data.test, predictions, {})}};
    json per_class = json::object(), per_scenario = json::object();
    for (Label c = 0; c < data.test.num_classes(); ++c)
        if (!data.test.indices(SampleFilter::of_classes({c})).empty())
            per_class[std::to_string(c)] = accuracy_of(data.test, predictions, SampleFilter::of_classes({c}));
    for (Label s = 0; s < data.test.num_scenarios(); ++s)
        if (!data.test.indices(SampleFilter::of_scenarios({s})).empty())
            per_scenario[std::to_string(s)] = accuracy_of(data.test, predictions, SampleFilter::of_scenarios({s}));
    report["per_class"] = per_class;
    report["per_scenario"] = per_scenario;
    std::cout << report.dump(2) << '\n';

    if (!common.out.empty()) {
        const fs::path dir = common.out;
        const fs::path manifest_path = dir / "eval.manifest.json";
        RunManifest manifest{"eval", hash, cfg.settings.seed};
        manifest.started_at = utc_timestamp();
        guard_manifest(manifest_path, hash, common.force);
        fs::create_directories(dir);
        write_json(dir / "eval.json", report);
        manifest.outputs = {dir / "eval.json", manifest_path};
        finish_manifest(manifest, manifest_path);
    }
    return 0;
}

// ---------------------------------------------------------------- membench

struct MembenchOptions {
    std::size_t entries = 2560;
    std::vector<std::size_t> neurons = {700, 200, 100, 50};
    std::size_t timesteps = 100;
    std::vector<std::size_t> ratios = {1, 5, 10};
    std::string codec = "chunk_threshold";
};

int cmd_membench(const MembenchOptions& o, const CommonOptions& common) {
    std::vector<CodecSpec> grid;
    auto add_kind = [&](CodecKind kind) {
        if (kind == CodecKind::aggregate_count) {
            grid.push_back({kind, 1, 1});
            return;
        }
        for (auto r : o.ratios) grid.push_back({kind, r, 1});
    };
    if (o.codec == "all") {
        add_kind(CodecKind::chunk_threshold);
        add_kind(CodecKind::aggregate_count);
        add_kind(CodecKind::hybrid_count);
    } else {
        add_kind(codec_kind_from_string(o.codec));
    }
    for (const auto& c : grid) c.validate(o.timesteps);

    std::ostringstream csv;
    csv << "codec,ratio,entries,neurons,timesteps,bits_per_entry,bytes\n";
    std::cout << "entries=" << o.entries << " timesteps=" << o.timesteps << '\n';
    std::printf("%-16s %6s", "codec", "ratio");
    for (auto n : o.neurons) std::printf(" %12s", (std::to_string(n) + " neurons").c_str());
    std::printf("\n");
    for (const auto& c : grid) {
        std::printf("%-16s %6zu", to_string(c.kind).c_str(), c.ratio);
        for (auto n : o.neurons) {
            const auto bytes = footprint_bytes(c, o.entries, n, o.timesteps);
            std::printf(" %12s", human_bytes(bytes).c_str());
            csv << to_string(c.kind) << ',' << c.ratio << ',' << o.entries << ',' << n << ',' << o.timesteps << ','
                << c.entry_bits(o.timesteps, n) << ',' << bytes << '\n';
        }
        std::printf("\n");
    }
    std::fflush(stdout);

    if (!common.out.empty()) {
        const fs::path out = common.out;
        const json params = {{"entries", o.entries},
                             {"neurons", o.neurons},
                             {"timesteps", o.timesteps},
                             {"ratios", o.ratios},
                             {"codec", o.codec}};
        const fs::path manifest_path = fs::path(out).concat(".manifest.json");
        RunManifest manifest{"membench", config_hash(params), 0};
        manifest.started_at = utc_timestamp();
        guard_manifest(manifest_path, manifest.config_hash, common.force);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_text(out, [&](std::ostream& f) { f << csv.str(); });
        manifest.outputs = {out, manifest_path};
        finish_manifest(manifest, manifest_path);
    }
    return 0;
}

// ---------------------------------------------------------------- convert-check

int cmd_convert_check(const std::string& path, const CommonOptions& common) {
    if (!fs::exists(path)) throw UsageError("file not found: " + path);
    const auto set = load_spikeset(path);
    std::map<Label, std::size_t> per_class, per_scenario;
    std::size_t spikes = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        ++per_class[set[i].class_id];
        ++per_scenario[set[i].scenario_id];
        spikes += set[i].tensor.popcount();
    }
    json report = {{"file", path},
                   {"valid", true},
                   {"samples", set.size()},
                   {"timesteps", set.timesteps()},
                   {"neurons", set.neurons()},
                   {"num_classes", set.num_classes()},
                   {"num_scenarios", set.num_scenarios()},
                   {"file_bytes", fs::file_size(path)},
                   {"spike_density", set.size() == 0 ? 0.0
                                                     : double(spikes) / (double(set.size()) * double(set.timesteps()) *
                                                                         double(set.neurons()))}};
    json pc = json::object(), ps = json::object();
    for (auto [k, v] : per_class) pc[std::to_string(k)] = v;
    for (auto [k, v] : per_scenario) ps[std::to_string(k)] = v;
    report["per_class"] = pc;
    report["per_scenario"] = ps;
    std::cout << report.dump(2) << '\n';

    if (!common.out.empty()) {
        const fs::path out = common.out;
        const fs::path manifest_path = fs::path(out).concat(".manifest.json");
        RunManifest manifest{"convert-check", config_hash({{"file", path}}), 0};
        manifest.started_at = utc_timestamp();
        guard_manifest(manifest_path, manifest.config_hash, common.force);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_json(out, report);
        manifest.outputs = {out, manifest_path};
        finish_manifest(manifest, manifest_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiking neural network continual learning with compressed latent replay"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kSoftwareVersion);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub, bool seed) {
        if (seed) sub->add_option("--seed", common.seed, "Override the configured seed");
        sub->add_option("--threads", common.threads, "Worker threads (fallback: SPIKING_REPLAY_THREADS)");
        sub->add_flag("--force", common.force, "Overwrite the outputs of a previous run");
    };

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic SpikeSet");
    synth_cmd->add_option("--out", common.out, "Output .spks file")->required();
    synth_cmd->add_option("--classes", synth.spec.classes)->capture_default_str();
    synth_cmd->add_option("--scenarios", synth.spec.scenarios)->capture_default_str();
    synth_cmd->add_option("--samples", synth.spec.samples_per_group, "Samples per (class, scenario)")
        ->capture_default_str();
    synth_cmd->add_option("--timesteps", synth.spec.timesteps)->capture_default_str();
    synth_cmd->add_option("--neurons", synth.spec.neurons)->capture_default_str();
    synth_cmd->add_option("--segments", synth.spec.segments)->capture_default_str();
    synth_cmd->add_option("--active-fraction", synth.spec.active_fraction)->capture_default_str();
    synth_cmd->add_option("--rate-active", synth.spec.rate_active)->capture_default_str();
    synth_cmd->add_option("--rate-background", synth.spec.rate_background)->capture_default_str();
    synth_cmd->add_option("--time-offset", synth.spec.scenario_time_offset)->capture_default_str();
    synth_cmd->add_option("--neuron-shift", synth.spec.scenario_neuron_shift)->capture_default_str();
    synth_cmd->add_option("--jitter", synth.spec.jitter)->capture_default_str();
    synth_cmd->add_option("--test-fraction", synth.test_fraction, "Also write a stratified test split next to --out")
        ->check(CLI::Range(0.0, 1.0));
    add_common(synth_cmd, true);

    std::string config_path;
    std::optional<std::string> checkpoint;
    bool dry_run = false;

    auto* pretrain_cmd = app.add_subcommand("pretrain", "Train the initial network on the pretraining subset");
    pretrain_cmd->add_option("--config", config_path, "Experiment JSON")->required();
    pretrain_cmd->add_option("--out", common.out, "Output directory (overrides config)");
    add_common(pretrain_cmd, true);

    auto* continual_cmd = app.add_subcommand("continual", "Run the continual-learning protocol from a checkpoint");
    continual_cmd->add_option("--config", config_path, "Experiment JSON")->required();
    continual_cmd->add_option("--out", common.out, "Output directory (overrides config)");
    continual_cmd->add_option("--checkpoint", checkpoint, "Pretrained checkpoint (default: <output>/pretrained.json)");
    continual_cmd->add_flag("--dry-run", dry_run, "Print the resolved plan without training");
    add_common(continual_cmd, true);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test set");
    eval_cmd->add_option("--config", config_path, "Experiment JSON")->required();
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint (default: <output>/pretrained.json)");
    eval_cmd->add_option("--out", common.out, "Directory for eval.json");
    add_common(eval_cmd, true);

    MembenchOptions bench;
    auto* bench_cmd = app.add_subcommand("membench", "Print replay-memory footprints over a codec grid");
    bench_cmd->add_option("--entries", bench.entries)->capture_default_str();
    bench_cmd->add_option("--neurons", bench.neurons)->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--timesteps", bench.timesteps)->capture_default_str();
    bench_cmd->add_option("--ratios", bench.ratios)->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--codec", bench.codec, "chunk_threshold | aggregate | hybrid | all")->capture_default_str();
    bench_cmd->add_option("--out", common.out, "Also write the grid as CSV");
    add_common(bench_cmd, false);

    std::string check_path;
    auto* check_cmd = app.add_subcommand("convert-check", "Validate a SpikeSet file and summarize it");
    check_cmd->add_option("file", check_path, "SpikeSet file")->required();
    check_cmd->add_option("--out", common.out, "Also write the summary as JSON");
    add_common(check_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, common);
        if (*pretrain_cmd) return cmd_pretrain(config_path, common);
        if (*continual_cmd) return cmd_continual(config_path, checkpoint, dry_run, common);
        if (*eval_cmd) return cmd_eval(config_path, checkpoint, common);
        if (*bench_cmd) return cmd_membench(bench, common);
        if (*check_cmd) return cmd_convert_check(check_path, common);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
