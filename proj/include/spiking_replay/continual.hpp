#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spiking_replay/network.hpp"
#include "spiking_replay/replay_buffer.hpp"
#include "spiking_replay/spike_set.hpp"
#include "spiking_replay/trainer.hpp"

namespace spiking_replay {

enum class ProtocolKind { sample_incremental, class_incremental, multi_class_incremental };

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_from_string(const std::string& name);

/// One continual-learning experiment over a pretraining subset and an
/// ordered schedule of increments.
///
/// For sample_incremental the schedule and `pretrain_ids` are scenario ids;
/// for the class modes they are class ids. An empty `pretrain_ids` means
/// "every id not in the schedule".
struct CLScenario {
    ProtocolKind kind = ProtocolKind::sample_incremental;
    std::vector<Label> pretrain_ids;
    std::vector<Label> increments;
    std::size_t lr_count = 0;         ///< replays captured after pretraining
    std::size_t per_class_quota = 0;  ///< multi-class: replays added per learned class
    std::size_t layer_index = 0;      ///< K, number of frozen layers
    CodecSpec codec;
    std::size_t pretrain_epochs = 0;
    std::size_t cl_epochs = 50;
    bool use_replay = true;  ///< false trains on new data alone (naive incremental)

    /// Resolves defaults and checks ids against the dataset and the split
    /// index against the network depth. Throws std::invalid_argument.
    void validate(const SpikeSet& data, std::size_t depth) const;

    std::set<Label> resolved_pretrain_ids(const SpikeSet& data) const;
    /// Replays captured after pretraining; multi-class defaults to quota x classes.
    std::size_t initial_replay_count(const SpikeSet& data) const;
    SampleFilter pretrain_filter(const SpikeSet& data) const;
    /// Samples seen before increment `step` (pretraining plus earlier increments).
    SampleFilter old_filter(const SpikeSet& data, std::size_t step) const;
    SampleFilter new_filter(std::size_t step) const;
};

struct ExperimentSettings {
    NetworkShape shape;
    TrainConfig pretrain;
    TrainConfig continual;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool record_wall_time = false;  ///< when false, wall_ms columns are written as 0
};

struct PretrainResult {
    Network network;
    std::vector<EpochMetrics> history;
    double acc_old = 0.0;   ///< test accuracy on the pretraining subset
    double acc_full = 0.0;  ///< test accuracy on the full test set
};

struct CLReportRow {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double acc_full = 0.0;
    double acc_old = 0.0;
    double acc_new = 0.0;
    double forgetting = 0.0;
    std::size_t replay_bytes = 0;
    std::int64_t wall_ms = 0;
};

struct CLStepSummary {
    std::size_t step = 0;
    Label increment = 0;
    double acc_old_before = 0.0;
    double acc_new_before = 0.0;
    double acc_old_after = 0.0;
    double acc_new_after = 0.0;
    double acc_full_after = 0.0;
    double forgetting = 0.0;
    std::size_t replay_entries = 0;
    std::size_t replay_bytes = 0;  ///< buffer footprint after the step
};

struct CLReport {
    PretrainResult pretrain;
    std::size_t initial_replay_entries = 0;
    std::size_t initial_replay_bytes = 0;
    std::vector<CLReportRow> rows;
    std::vector<CLStepSummary> steps;
};

/// Old-subset accuracy before minus after; positive values mean forgetting.
inline double forgetting(double acc_old_before, double acc_old_after) { return acc_old_before - acc_old_after; }

/// Trains `net` for the scenario's pretraining epochs on the pretraining
/// subset of `train` and records baseline accuracies on `test`. `on_epoch`
/// sees the network after each epoch.
using PretrainCallback = std::function<void(const EpochMetrics&, const Network&)>;
PretrainResult pretrain(Network net, const SpikeSet& train, const SpikeSet& test, const CLScenario& scenario,
                        const ExperimentSettings& settings, const PretrainCallback& on_epoch = {});

/// Redraws the output neuron `class_id`'s feed-forward row (and recurrent
/// row and column, if the output layer is recurrent) from a normal
/// distribution matching the mean and standard deviation of every other
/// output-layer feed-forward weight.
void reinit_new_class(Network& net, Label class_id, std::uint64_t seed);

/// Mutable state carried across increments.
struct ContinualState {
    Network network;  ///< full network, split_index = K
    ReplayBuffer buffer;
};

/// Learns increment `step` of the schedule: frozen forward of the new
/// training data, mixing with decompressed replays, training the learning
/// layers for cl_epochs, per-epoch evaluation, and (multi-class) buffer
/// growth. Appends rows and a summary to `report`.
void run_increment(ContinualState& state, const SpikeSet& train, const SpikeSet& test, const CLScenario& scenario,
                   const ExperimentSettings& settings, std::size_t step, CLReport& report);

struct ProtocolResult {
    CLReport report;
    ContinualState state;
};

using StepCallback = std::function<void(std::size_t step, const ContinualState&)>;

/// Full pipeline: pretrain (or adopt `pretrained`), capture replays, then
/// reinit and run_increment for every scheduled increment. `on_step` sees
/// the state after each increment.
ProtocolResult run_protocol(const CLScenario& scenario, const ExperimentSettings& settings, const SpikeSet& train,
                            const SpikeSet& test, std::optional<Network> pretrained = std::nullopt,
                            const StepCallback& on_step = {});

/// Dataset splits, replay counts and footprints the protocol would use.
struct ProtocolPlan {
    std::size_t pretrain_train = 0;
    std::size_t pretrain_test = 0;
    std::size_t initial_replays = 0;
    std::size_t latent_neurons = 0;
    std::size_t initial_replay_bytes = 0;
    struct Step {
        Label increment = 0;
        std::size_t new_train = 0;
        std::size_t new_test = 0;
        std::size_t replay_bytes_after = 0;
    };
    std::vector<Step> steps;
};

ProtocolPlan plan_protocol(const CLScenario& scenario, const ExperimentSettings& settings, const SpikeSet& train,
                           const SpikeSet& test);

}  // namespace spiking_replay
