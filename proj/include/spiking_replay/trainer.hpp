#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spiking_replay/network.hpp"
#include "spiking_replay/spike_set.hpp"

namespace spiking_replay {

/// Derivative of the fast sigmoid, 1 / (1 + k|u|)^2, used in place of the
/// Heaviside derivative during backpropagation. `u` is membrane minus threshold.
inline double surrogate_grad(double u, double k) {
    const double d = 1.0 + k * (u < 0 ? -u : u);
    return 1.0 / (d * d);
}

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;  ///< dLoss / dCount per class
};

/// Softmax cross-entropy over real-valued class scores.
LossResult softmax_cross_entropy(std::span<const double> scores, Label label);

/// Softmax cross-entropy over the per-class spike counts of an output raster.
LossResult loss_spike_count_ce(const SpikeTensor& output, Label label);

/// Everything reverse-mode differentiation needs, one entry per layer.
struct ForwardTrace {
    std::vector<LayerTrace> layers;

    std::size_t timesteps() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().syn.cols()); }
    /// Per-class totals of the last layer's spike matrix.
    std::vector<double> output_counts() const;
};

/// Hard-threshold forward pass that records a ForwardTrace. Spikes match
/// network_forward bit-for-bit.
ForwardTrace record_trace(const Network& net, const SpikeTensor& input);

struct LayerGradients {
    Eigen::MatrixXd dW;
    Eigen::MatrixXd dV;
};

struct Gradients {
    std::vector<LayerGradients> layers;

    static Gradients zeros_like(const Network& net);
    Gradients& operator+=(const Gradients& other);
    Gradients& operator*=(double s);
    bool all_zero() const;
};

/// Reverse-mode gradients of the unrolled network, with the spike
/// nonlinearity's derivative replaced by surrogate_grad(mem - theta, slope).
/// `count_grad` is dLoss/dCount for the last layer; every timestep of the
/// output spikes receives it. Paths through V and the soft-reset term are
/// included. Throws NumericError at the first non-finite adjoint.
Gradients bptt_backward(const Network& net, const ForwardTrace& trace, std::span<const double> count_grad,
                        double surrogate_slope);

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 1;
    std::size_t batch_size = 16;
    double surrogate_slope = 25.0;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t threads = 1;

    void validate() const;
};

/// Adam or SGD over every W and every recurrent V of a network.
class Optimizer {
public:
    Optimizer(const Network& net, const TrainConfig& cfg);

    /// Throws std::invalid_argument if gradient shapes do not match the network.
    void step(Network& net, const Gradients& grads);

    std::size_t steps_taken() const noexcept { return steps_; }

private:
    TrainConfig cfg_;
    Gradients m_;
    Gradients v_;
    std::size_t steps_ = 0;
};

struct LabeledTensor {
    SpikeTensor tensor;
    Label label = 0;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Owns the optimizer state for a network across successive epochs.
class Trainer {
public:
    Trainer(Network& net, TrainConfig cfg);

    /// One pass over `data`: seeded shuffle, minibatches, mean gradient per
    /// batch reduced in sample order, one optimizer step per batch.
    EpochMetrics run_epoch(std::span<const LabeledTensor> data);

    std::size_t epochs_run() const noexcept { return epoch_; }

private:
    Network& net_;
    TrainConfig cfg_;
    Optimizer optimizer_;
    std::size_t epoch_ = 0;
};

std::vector<EpochMetrics> train_epochs(Network& net, std::span<const LabeledTensor> data, const TrainConfig& cfg,
                                       const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Argmax of per-class output spike counts; ties resolve to the lowest class.
Label predict(const Network& net, const SpikeTensor& input);
Label argmax_counts(std::span<const double> counts);

std::vector<Label> predict_all(const Network& net, const SpikeSet& set, std::size_t threads = 1);

/// Top-1 accuracy of precomputed predictions over the filtered subset.
/// Throws std::invalid_argument when the filter selects nothing.
double accuracy_of(const SpikeSet& set, const std::vector<Label>& predictions, const SampleFilter& filter = {});

double evaluate(const Network& net, const SpikeSet& set, const SampleFilter& filter = {}, std::size_t threads = 1);

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

}  // namespace spiking_replay
