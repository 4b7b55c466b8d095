#include "spiking_replay/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "spiking_replay/rng.hpp"

namespace spiking_replay {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

void read_train_config(const json& j, TrainConfig& cfg) {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.surrogate_slope = j.value("surrogate_slope", cfg.surrogate_slope);
    if (j.contains("optimizer")) cfg.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
    cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
    cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
    cfg.adam_epsilon = j.value("adam_epsilon", cfg.adam_epsilon);
    cfg.validate();
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

std::filesystem::path ExperimentConfig::pretrained_checkpoint() const {
    return checkpoint_path.value_or(output_dir / "pretrained.json");
}

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    cfg.raw = doc;
    try {
        cfg.settings.seed = doc.value("seed", std::uint64_t{0});
        cfg.settings.threads = doc.value("threads", std::size_t{1});
        cfg.settings.record_wall_time = doc.value("record_wall_time", false);

        const auto& data = doc.at("data");
        cfg.train_path = resolve(base_dir, data.at("train").get<std::string>());
        if (data.contains("test") && !data["test"].is_null())
            cfg.test_path = resolve(base_dir, data["test"].get<std::string>());
        cfg.test_fraction = data.value("test_fraction", cfg.test_fraction);

        const auto net = doc.value("network", json::object());
        cfg.hidden = net.value("hidden", cfg.hidden);
        auto& shape = cfg.settings.shape;
        shape.params.alpha = net.value("alpha", shape.params.alpha);
        shape.params.beta = net.value("beta", shape.params.beta);
        shape.params.theta = net.value("theta", shape.params.theta);
        shape.init_gain = net.value("init_gain", shape.init_gain);
        shape.recurrent_output = net.value("recurrent_output", shape.recurrent_output);

        read_train_config(doc.value("train", json::object()), cfg.settings.pretrain);
        cfg.settings.continual = cfg.settings.pretrain;
        read_train_config(doc.value("continual_train", json::object()), cfg.settings.continual);

        const auto& sc = doc.at("scenario");
        auto& s = cfg.scenario;
        s.kind = protocol_from_string(sc.at("kind").get<std::string>());
        s.pretrain_ids = sc.value("pretrain_ids", std::vector<Label>{});
        s.increments = sc.at("increments").get<std::vector<Label>>();
        s.lr_count = sc.value("lr_count", std::size_t{0});
        s.per_class_quota = sc.value("per_class_quota", std::size_t{0});
        s.layer_index = sc.value("layer_index", std::size_t{0});
        s.pretrain_epochs = sc.value("pretrain_epochs", std::size_t{0});
        s.cl_epochs = sc.value("cl_epochs", s.cl_epochs);
        s.use_replay = sc.value("use_replay", true);
        if (sc.contains("codec")) {
            const auto& c = sc["codec"];
            s.codec.kind = codec_kind_from_string(c.value("kind", std::string("chunk_threshold")));
            s.codec.ratio = c.value("ratio", std::size_t{1});
            s.codec.threshold = c.value("threshold", std::size_t{1});
        }
        s.codec.validate();

        cfg.output_dir = resolve(base_dir, doc.value("output", std::string("run")));
        if (doc.contains("checkpoint") && !doc["checkpoint"].is_null())
            cfg.checkpoint_path = resolve(base_dir, doc["checkpoint"].get<std::string>());
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (cfg.hidden.empty()) throw std::invalid_argument("config: network.hidden must list at least one layer");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return parse_experiment_config(doc, path.parent_path());
}

void bind_dataset_shape(ExperimentConfig& cfg, const SpikeSet& data) {
    auto& sizes = cfg.settings.shape.sizes;
    sizes.clear();
    sizes.push_back(data.neurons());
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(data.num_classes());
}

Datasets load_datasets(const ExperimentConfig& cfg) {
    auto train = load_spikeset(cfg.train_path);
    if (cfg.test_path) return {std::move(train), load_spikeset(*cfg.test_path)};
    auto split = stratified_split(train, cfg.test_fraction, substream_seed(cfg.settings.seed, "split"));
    return {std::move(split.train), std::move(split.test)};
}

std::string config_hash(const json& doc) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
    return buf;
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["software_version"] = software_version;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = json::array();
    for (const auto& p : outputs) j["outputs"].push_back(p.string());
    return j;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_metrics_csv(std::ostream& out, const std::vector<PretrainEpochRow>& rows) {
    out << "epoch,phase,loss,acc_all,acc_old,acc_new,wall_ms\n";
    for (const auto& r : rows)
        out << r.epoch << ',' << r.phase << ',' << fmt("%.9g", r.loss) << ',' << fmt("%.6f", r.acc_all) << ','
            << fmt("%.6f", r.acc_old) << ',' << fmt("%.6f", r.acc_new) << ',' << r.wall_ms << '\n';
}

void write_cl_report_csv(std::ostream& out, const std::vector<CLReportRow>& rows) {
    out << "step,epoch,acc_full,acc_old,acc_new,forgetting,replay_bytes,wall_ms\n";
    for (const auto& r : rows)
        out << r.step << ',' << r.epoch << ',' << fmt("%.6f", r.acc_full) << ',' << fmt("%.6f", r.acc_old) << ','
            << fmt("%.6f", r.acc_new) << ',' << fmt("%.6f", r.forgetting) << ',' << r.replay_bytes << ',' << r.wall_ms
            << '\n';
}

json cl_summary_json(const CLReport& report, const CLScenario& scenario) {
    json j;
    j["protocol"] = to_string(scenario.kind);
    j["layer_index"] = scenario.layer_index;
    j["codec"] = {{"kind", to_string(scenario.codec.kind)},
                  {"ratio", scenario.codec.ratio},
                  {"threshold", scenario.codec.threshold}};
    j["use_replay"] = scenario.use_replay;
    j["pretrain"] = {{"acc_old", report.pretrain.acc_old}, {"acc_full", report.pretrain.acc_full}};
    j["initial_replay_entries"] = report.initial_replay_entries;
    j["initial_replay_bytes"] = report.initial_replay_bytes;
    j["steps"] = json::array();
    double forgetting_sum = 0.0;
    for (const auto& s : report.steps) {
        forgetting_sum += s.forgetting;
        j["steps"].push_back({{"step", s.step},
                              {"increment", s.increment},
                              {"acc_old_before", s.acc_old_before},
                              {"acc_new_before", s.acc_new_before},
                              {"acc_old_after", s.acc_old_after},
                              {"acc_new_after", s.acc_new_after},
                              {"acc_full_after", s.acc_full_after},
                              {"forgetting", s.forgetting},
                              {"replay_entries", s.replay_entries},
                              {"replay_bytes", s.replay_bytes}});
    }
    if (!report.steps.empty()) {
        j["mean_forgetting"] = forgetting_sum / static_cast<double>(report.steps.size());
        j["final_acc_full"] = report.steps.back().acc_full_after;
    }
    return j;
}

json plan_json(const ProtocolPlan& plan, const CLScenario& scenario) {
    json j;
    j["protocol"] = to_string(scenario.kind);
    j["layer_index"] = scenario.layer_index;
    j["pretrain_train_samples"] = plan.pretrain_train;
    j["pretrain_test_samples"] = plan.pretrain_test;
    j["initial_replays"] = plan.initial_replays;
    j["latent_neurons"] = plan.latent_neurons;
    j["initial_replay_bytes"] = plan.initial_replay_bytes;
    j["steps"] = json::array();
    for (const auto& s : plan.steps)
        j["steps"].push_back({{"increment", s.increment},
                              {"new_train_samples", s.new_train},
                              {"new_test_samples", s.new_test},
                              {"replay_bytes_after", s.replay_bytes_after}});
    return j;
}

}  // namespace spiking_replay
