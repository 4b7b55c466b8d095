#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spiking_replay/continual.hpp"

namespace spiking_replay {

inline constexpr const char* kSoftwareVersion = "0.3.0";

/// Everything a `pretrain` or `continual` run needs, resolved from one JSON file.
struct ExperimentConfig {
    ExperimentSettings settings;
    CLScenario scenario;
    std::vector<std::size_t> hidden = {200, 100, 50};
    std::filesystem::path train_path;
    std::optional<std::filesystem::path> test_path;
    double test_fraction = 0.2;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> checkpoint_path;
    nlohmann::json raw;  ///< the config as written, for hashing and the manifest

    /// Default location of the pretrained checkpoint inside output_dir.
    std::filesystem::path pretrained_checkpoint() const;
};

/// Parses and validates a config document. Relative paths are resolved
/// against `base_dir`. Throws std::invalid_argument on schema errors.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Completes the network shape from the dataset: input = neurons, output = classes.
void bind_dataset_shape(ExperimentConfig& cfg, const SpikeSet& data);

struct Datasets {
    SpikeSet train;
    SpikeSet test;
};

/// Loads the training set and either the explicit test set or a stratified split.
Datasets load_datasets(const ExperimentConfig& cfg);

/// 16-hex-digit FNV-1a digest of the canonical (sorted-key, compact) JSON.
std::string config_hash(const nlohmann::json& doc);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string software_version = kSoftwareVersion;
    std::string started_at;
    std::string finished_at;
    std::vector<std::filesystem::path> outputs;

    nlohmann::json to_json() const;
};

std::string utc_timestamp();

struct PretrainEpochRow {
    std::size_t epoch = 0;
    std::string phase = "pretrain";
    double loss = 0.0;
    double acc_all = 0.0;
    double acc_old = 0.0;
    double acc_new = 0.0;
    std::int64_t wall_ms = 0;
};

/// Header: epoch,phase,loss,acc_all,acc_old,acc_new,wall_ms
void write_metrics_csv(std::ostream& out, const std::vector<PretrainEpochRow>& rows);
/// Header: step,epoch,acc_full,acc_old,acc_new,forgetting,replay_bytes,wall_ms
void write_cl_report_csv(std::ostream& out, const std::vector<CLReportRow>& rows);
nlohmann::json cl_summary_json(const CLReport& report, const CLScenario& scenario);
nlohmann::json plan_json(const ProtocolPlan& plan, const CLScenario& scenario);

}  // namespace spiking_replay
