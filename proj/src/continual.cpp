#include "spiking_replay/continual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spiking_replay/parallel.hpp"
#include "spiking_replay/rng.hpp"

namespace spiking_replay {

std::string to_string(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::sample_incremental: return "sample_incremental";
        case ProtocolKind::class_incremental: return "class_incremental";
        case ProtocolKind::multi_class_incremental: return "multi_class_incremental";
    }
    return "unknown";
}

ProtocolKind protocol_from_string(const std::string& name) {
    if (name == "sample_incremental") return ProtocolKind::sample_incremental;
    if (name == "class_incremental") return ProtocolKind::class_incremental;
    if (name == "multi_class_incremental") return ProtocolKind::multi_class_incremental;
    throw std::invalid_argument("unknown protocol '" + name + "'");
}

namespace {

bool by_scenario(ProtocolKind kind) { return kind == ProtocolKind::sample_incremental; }

SampleFilter filter_on(ProtocolKind kind, std::set<Label> ids) {
    return by_scenario(kind) ? SampleFilter::of_scenarios(std::move(ids)) : SampleFilter::of_classes(std::move(ids));
}

std::vector<LabeledTensor> labeled_inputs(const SpikeSet& set, const SampleFilter& filter) {
    std::vector<LabeledTensor> out;
    for (auto i : set.indices(filter)) out.push_back({set[i].tensor, set[i].class_id});
    return out;
}

std::size_t latent_width(const CLScenario& scenario, const NetworkShape& shape, const SpikeSet& data) {
    if (scenario.layer_index == 0) return data.neurons();
    return shape.sizes.at(scenario.layer_index);
}

class Stopwatch {
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    std::int64_t elapsed_ms() const {
        if (!enabled_) return 0;
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::set<Label> CLScenario::resolved_pretrain_ids(const SpikeSet& data) const {
    if (!pretrain_ids.empty()) return {pretrain_ids.begin(), pretrain_ids.end()};
    std::set<Label> ids;
    const auto limit = by_scenario(kind) ? data.num_scenarios() : data.num_classes();
    for (Label id = 0; id < limit; ++id)
        if (std::find(increments.begin(), increments.end(), id) == increments.end()) ids.insert(id);
    return ids;
}

void CLScenario::validate(const SpikeSet& data, std::size_t depth) const {
    if (increments.empty()) throw std::invalid_argument("CLScenario: increment schedule is empty");
    const auto limit = by_scenario(kind) ? data.num_scenarios() : data.num_classes();
    const char* what = by_scenario(kind) ? "scenario" : "class";
    const auto pre = resolved_pretrain_ids(data);
    if (pre.empty()) throw std::invalid_argument("CLScenario: pretraining subset is empty");
    std::set<Label> seen;
    for (auto id : increments) {
        if (id >= limit)
            throw std::invalid_argument(std::string("CLScenario: increment ") + what + " " + std::to_string(id) +
                                        " out of range");
        if (pre.contains(id))
            throw std::invalid_argument(std::string("CLScenario: increment ") + what + " " + std::to_string(id) +
                                        " is also in the pretraining subset");
        if (!seen.insert(id).second)
            throw std::invalid_argument("CLScenario: duplicate increment " + std::to_string(id));
    }
    for (auto id : pre)
        if (id >= limit)
            throw std::invalid_argument(std::string("CLScenario: pretraining ") + what + " " + std::to_string(id) +
                                        " out of range");
    if (layer_index >= depth)
        throw std::invalid_argument("CLScenario: layer_index " + std::to_string(layer_index) +
                                    " must be < network depth " + std::to_string(depth));
    if (kind == ProtocolKind::multi_class_incremental && per_class_quota == 0 && use_replay)
        throw std::invalid_argument("CLScenario: multi-class protocol needs per_class_quota > 0");
    codec.validate(data.timesteps());
}

std::size_t CLScenario::initial_replay_count(const SpikeSet& data) const {
    if (!use_replay) return 0;
    if (lr_count > 0) return lr_count;
    if (kind == ProtocolKind::multi_class_incremental) return per_class_quota * resolved_pretrain_ids(data).size();
    return 0;
}

SampleFilter CLScenario::pretrain_filter(const SpikeSet& data) const {
    return filter_on(kind, resolved_pretrain_ids(data));
}

SampleFilter CLScenario::old_filter(const SpikeSet& data, std::size_t step) const {
    auto ids = resolved_pretrain_ids(data);
    for (std::size_t i = 0; i < step && i < increments.size(); ++i) ids.insert(increments[i]);
    return filter_on(kind, std::move(ids));
}

SampleFilter CLScenario::new_filter(std::size_t step) const { return filter_on(kind, {increments.at(step)}); }

PretrainResult pretrain(Network net, const SpikeSet& train, const SpikeSet& test, const CLScenario& scenario,
                        const ExperimentSettings& settings, const PretrainCallback& on_epoch) {
    const auto filter = scenario.pretrain_filter(train);
    const auto data = labeled_inputs(train, filter);
    if (data.empty()) throw std::invalid_argument("pretrain: pretraining subset of the training set is empty");

    PretrainResult result;
    if (scenario.pretrain_epochs > 0) {
        auto cfg = settings.pretrain;
        cfg.epochs = scenario.pretrain_epochs;
        cfg.seed = substream_seed(settings.seed, "pretrain");
        cfg.threads = settings.threads;
        Trainer trainer(net, cfg);
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            result.history.push_back(trainer.run_epoch(data));
            if (on_epoch) on_epoch(result.history.back(), net);
        }
    }
    const auto predictions = predict_all(net, test, settings.threads);
    result.acc_old = accuracy_of(test, predictions, filter);
    result.acc_full = accuracy_of(test, predictions);
    result.network = std::move(net);
    return result;
}

void reinit_new_class(Network& net, Label class_id, std::uint64_t seed) {
    if (net.empty()) throw std::invalid_argument("reinit_new_class: empty network");
    auto& out = net.layers.back();
    const auto rows = out.W.rows();
    if (class_id >= rows)
        throw std::invalid_argument("reinit_new_class: class " + std::to_string(class_id) + " has no output neuron");
    if (rows < 2) throw std::invalid_argument("reinit_new_class: need at least one other class to estimate from");

    double sum = 0.0;
    std::size_t n = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (r == class_id) continue;
        sum += out.W.row(r).sum();
        n += static_cast<std::size_t>(out.W.cols());
    }
    const double first = out.W(class_id == 0 ? 1 : 0, 0);
    bool constant = true;
    for (Eigen::Index r = 0; r < rows && constant; ++r)
        if (r != class_id) constant = (out.W.row(r).array() == first).all();
    const double mean = constant ? first : sum / static_cast<double>(n);
    double sq = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (r == class_id) continue;
        sq += (out.W.row(r).array() - mean).square().sum();
    }
    const double stddev = !constant && n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;

    auto rng = make_rng(seed, "reinit", class_id);
    auto draw = [&]() -> double {
        if (!(stddev > 0.0)) return mean;
        return std::normal_distribution<double>(mean, stddev)(rng);
    };
    for (Eigen::Index c = 0; c < out.W.cols(); ++c) out.W(class_id, c) = draw();
    if (out.recurrent) {
        for (Eigen::Index c = 0; c < out.V.cols(); ++c) out.V(class_id, c) = draw();
        for (Eigen::Index r = 0; r < out.V.rows(); ++r)
            if (r != class_id) out.V(r, class_id) = draw();
    }
}

void run_increment(ContinualState& state, const SpikeSet& train, const SpikeSet& test, const CLScenario& scenario,
                   const ExperimentSettings& settings, std::size_t step, CLReport& report) {
    const Stopwatch clock(settings.record_wall_time);
    const auto old_filter = scenario.old_filter(train, step);
    const auto new_filter = scenario.new_filter(step);

    auto parts = split_network(state.network, scenario.layer_index);
    const auto new_inputs = train.indices(new_filter);
    if (new_inputs.empty())
        throw std::invalid_argument("run_increment: no training samples for increment " +
                                    std::to_string(scenario.increments[step]));

    std::vector<LabeledTensor> new_latents(new_inputs.size());
    parallel_for(new_inputs.size(), settings.threads, [&](std::size_t i) {
        const auto& s = train[new_inputs[i]];
        new_latents[i] = {latent_at_split(parts.frozen, s.tensor), s.class_id};
    });

    CLStepSummary summary;
    summary.step = step;
    summary.increment = scenario.increments[step];
    {
        const auto before = predict_all(state.network, test, settings.threads);
        summary.acc_old_before = accuracy_of(test, before, old_filter);
        summary.acc_new_before = accuracy_of(test, before, new_filter);
    }

    const auto stream = mix_for_training(state.buffer, new_latents, substream_seed(settings.seed, "mix", step));

    auto cfg = settings.continual;
    cfg.epochs = scenario.cl_epochs;
    cfg.seed = substream_seed(settings.seed, "cl-step", step);
    cfg.threads = settings.threads;
    Trainer trainer(parts.learning, cfg);
    for (std::size_t e = 0; e < scenario.cl_epochs; ++e) {
        const auto metrics = trainer.run_epoch(stream);
        const auto joined = join_networks(parts.frozen, parts.learning);
        const auto predictions = predict_all(joined, test, settings.threads);
        CLReportRow row;
        row.step = step;
        row.epoch = e;
        row.train_loss = metrics.loss;
        row.acc_full = accuracy_of(test, predictions);
        row.acc_old = accuracy_of(test, predictions, old_filter);
        row.acc_new = accuracy_of(test, predictions, new_filter);
        row.forgetting = forgetting(summary.acc_old_before, row.acc_old);
        row.replay_bytes = state.buffer.footprint_bytes();
        row.wall_ms = clock.elapsed_ms();
        report.rows.push_back(row);
    }
    state.network = join_networks(parts.frozen, parts.learning);

    if (scenario.kind == ProtocolKind::multi_class_incremental && scenario.use_replay) {
        auto order = new_latents;
        auto rng = make_rng(settings.seed, "replay-select", step + 1);
        std::shuffle(order.begin(), order.end(), rng);
        state.buffer = buffer_extend(state.buffer, order, scenario.per_class_quota);
    }

    const auto after = predict_all(state.network, test, settings.threads);
    summary.acc_old_after = accuracy_of(test, after, old_filter);
    summary.acc_new_after = accuracy_of(test, after, new_filter);
    summary.acc_full_after = accuracy_of(test, after);
    summary.forgetting = forgetting(summary.acc_old_before, summary.acc_old_after);
    summary.replay_entries = state.buffer.size();
    summary.replay_bytes = state.buffer.footprint_bytes();
    report.steps.push_back(summary);
}

ProtocolResult run_protocol(const CLScenario& scenario, const ExperimentSettings& settings, const SpikeSet& train,
                            const SpikeSet& test, std::optional<Network> pretrained, const StepCallback& on_step) {
    const std::size_t depth = pretrained ? pretrained->depth() : settings.shape.sizes.size() - 1;
    scenario.validate(train, depth);
    if (train.neurons() != test.neurons() || train.timesteps() != test.timesteps())
        throw std::invalid_argument("run_protocol: train and test sets differ in shape");

    ProtocolResult result;
    auto& report = result.report;
    if (pretrained) {
        auto adopted = *pretrained;
        auto no_training = scenario;
        no_training.pretrain_epochs = 0;
        report.pretrain = pretrain(std::move(adopted), train, test, no_training, settings);
    } else {
        report.pretrain = pretrain(make_network(settings.shape, settings.seed), train, test, scenario, settings);
    }
    if (report.pretrain.network.input_size() != train.neurons())
        throw std::invalid_argument("run_protocol: network input size does not match dataset");

    auto& state = result.state;
    state.network = report.pretrain.network;
    state.network.split_index = scenario.layer_index;
    const auto parts = split_network(state.network, scenario.layer_index);

    const auto replay_sources =
        select_replay_indices(train, scenario.pretrain_filter(train), scenario.initial_replay_count(train),
                              substream_seed(settings.seed, "replay-select"));
    state.buffer = capture_latents(parts.frozen, train.subset(replay_sources), scenario.codec, settings.threads);
    report.initial_replay_entries = state.buffer.size();
    report.initial_replay_bytes = state.buffer.footprint_bytes();

    for (std::size_t step = 0; step < scenario.increments.size(); ++step) {
        if (scenario.kind != ProtocolKind::sample_incremental)
            reinit_new_class(state.network, scenario.increments[step], substream_seed(settings.seed, "reinit", step));
        run_increment(state, train, test, scenario, settings, step, report);
        if (on_step) on_step(step, state);
    }
    return result;
}

ProtocolPlan plan_protocol(const CLScenario& scenario, const ExperimentSettings& settings, const SpikeSet& train,
                           const SpikeSet& test) {
    scenario.validate(train, settings.shape.sizes.size() - 1);
    ProtocolPlan plan;
    const auto pre = scenario.pretrain_filter(train);
    plan.pretrain_train = train.indices(pre).size();
    plan.pretrain_test = test.indices(pre).size();
    plan.initial_replays = select_replay_indices(train, pre, scenario.initial_replay_count(train),
                                                 substream_seed(settings.seed, "replay-select"))
                               .size();
    plan.latent_neurons = latent_width(scenario, settings.shape, train);
    plan.initial_replay_bytes =
        footprint_bytes(scenario.codec, plan.initial_replays, plan.latent_neurons, train.timesteps());
    std::size_t entries = plan.initial_replays;
    for (std::size_t step = 0; step < scenario.increments.size(); ++step) {
        ProtocolPlan::Step s;
        s.increment = scenario.increments[step];
        s.new_train = train.indices(scenario.new_filter(step)).size();
        s.new_test = test.indices(scenario.new_filter(step)).size();
        if (scenario.kind == ProtocolKind::multi_class_incremental && scenario.use_replay)
            entries += std::min(scenario.per_class_quota, s.new_train);
        s.replay_bytes_after = footprint_bytes(scenario.codec, entries, plan.latent_neurons, train.timesteps());
        plan.steps.push_back(s);
    }
    return plan;
}

}  // namespace spiking_replay
