#include "spiking_replay/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spiking_replay/errors.hpp"
#include "spiking_replay/parallel.hpp"
#include "spiking_replay/rng.hpp"

namespace spiking_replay {

LossResult softmax_cross_entropy(std::span<const double> scores, Label label) {
    if (label >= scores.size())
        throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                    " >= " + std::to_string(scores.size()) + " classes");
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - top);
    const double log_z = top + std::log(z);

    LossResult r;
    r.loss = log_z - scores[label];
    r.grad.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) r.grad[i] = std::exp(scores[i] - log_z);
    r.grad[label] -= 1.0;
    return r;
}

LossResult loss_spike_count_ce(const SpikeTensor& output, Label label) {
    const auto counts = output.counts_per_neuron();
    std::vector<double> scores(counts.begin(), counts.end());
    return softmax_cross_entropy(scores, label);
}

std::vector<double> ForwardTrace::output_counts() const {
    const auto& s = layers.back().spikes;
    std::vector<double> counts(static_cast<std::size_t>(s.rows()));
    for (Eigen::Index n = 0; n < s.rows(); ++n) counts[static_cast<std::size_t>(n)] = s.row(n).sum();
    return counts;
}

ForwardTrace record_trace(const Network& net, const SpikeTensor& input) {
    ForwardTrace trace;
    trace.layers.resize(net.depth());
    SpikeTensor current = input;
    for (std::size_t i = 0; i < net.depth(); ++i) {
        try {
            current = layer_forward(net.layers[i], current, &trace.layers[i]);
        } catch (const NumericError& e) {
            throw NumericError("record_trace: non-finite membrane potential", i, e.timestep());
        }
    }
    return trace;
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers)
        g.layers.push_back(
            {Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()), Eigen::MatrixXd::Zero(l.V.rows(), l.V.cols())});
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    if (other.layers.size() != layers.size()) throw std::invalid_argument("Gradients: layer count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].dW += other.layers[i].dW;
        layers[i].dV += other.layers[i].dV;
    }
    return *this;
}

Gradients& Gradients::operator*=(double s) {
    for (auto& l : layers) {
        l.dW *= s;
        l.dV *= s;
    }
    return *this;
}

bool Gradients::all_zero() const {
    return std::all_of(layers.begin(), layers.end(),
                       [](const LayerGradients& l) { return l.dW.isZero(0.0) && l.dV.isZero(0.0); });
}

Gradients bptt_backward(const Network& net, const ForwardTrace& trace, std::span<const double> count_grad,
                        double surrogate_slope) {
    if (trace.layers.size() != net.depth()) throw std::invalid_argument("bptt_backward: trace depth != network depth");
    if (net.empty()) return {};
    if (count_grad.size() != net.output_size())
        throw std::invalid_argument("bptt_backward: loss gradient size != output size");
    for (double g : count_grad)
        if (!std::isfinite(g)) throw NumericError("bptt_backward: non-finite loss gradient", net.depth() - 1, 0);

    const auto T = static_cast<Eigen::Index>(trace.timesteps());
    Gradients grads = Gradients::zeros_like(net);

    // Adjoint of each layer's output spikes, [out x T]; starts as the loss
    // gradient broadcast over time.
    const Eigen::Map<const Eigen::VectorXd> loss_grad(count_grad.data(), static_cast<Eigen::Index>(count_grad.size()));
    Eigen::MatrixXd spike_adjoint = loss_grad.replicate(1, T);

    for (std::size_t li = net.depth(); li-- > 0;) {
        const auto& layer = net.layers[li];
        const auto& lt = trace.layers[li];
        const auto& p = layer.params;
        if (lt.syn.cols() != T || lt.mem.rows() != layer.W.rows() || lt.input.rows() != layer.W.cols())
            throw std::invalid_argument("bptt_backward: trace shape does not match layer " + std::to_string(li));

        const auto out = layer.W.rows();
        auto& dW = grads.layers[li].dW;
        auto& dV = grads.layers[li].dV;
        Eigen::MatrixXd input_adjoint;
        if (li > 0) input_adjoint = Eigen::MatrixXd::Zero(layer.W.cols(), T);

        Eigen::VectorXd a_syn_next = Eigen::VectorXd::Zero(out);
        Eigen::VectorXd a_mem_next = Eigen::VectorXd::Zero(out);
        Eigen::VectorXd a_s(out), a_mem(out), a_syn(out);

        for (Eigen::Index t = T; t-- > 0;) {
            // s_t feeds syn_{t+1} through V and mem_{t+1} through the reset.
            a_s = spike_adjoint.col(t) - p.theta * a_mem_next;
            if (layer.recurrent) a_s.noalias() += layer.V.transpose() * a_syn_next;

            for (Eigen::Index n = 0; n < out; ++n)
                a_mem[n] = a_s[n] * surrogate_grad(lt.mem(n, t) - p.theta, surrogate_slope) + p.beta * a_mem_next[n];
            a_syn = a_mem + p.alpha * a_syn_next;

            if (!a_syn.allFinite() || !a_mem.allFinite())
                throw NumericError("bptt_backward: non-finite adjoint", li, static_cast<std::size_t>(t));

            for (Eigen::Index j = 0; j < lt.input.rows(); ++j) {
                const double x = lt.input(j, t);
                if (x != 0.0) dW.col(j) += x * a_syn;
            }
            if (layer.recurrent && t > 0) {
                for (Eigen::Index j = 0; j < out; ++j) {
                    const double s = lt.spikes(j, t - 1);
                    if (s != 0.0) dV.col(j) += s * a_syn;
                }
            }
            if (li > 0) input_adjoint.col(t).noalias() = layer.W.transpose() * a_syn;

            a_syn_next = a_syn;
            a_mem_next = a_mem;
        }
        if (li > 0) spike_adjoint = std::move(input_adjoint);
    }
    return grads;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("TrainConfig: learning rate must be finite and non-negative");
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(surrogate_slope > 0.0)) throw std::invalid_argument("TrainConfig: surrogate slope must be > 0");
}

Optimizer::Optimizer(const Network& net, const TrainConfig& cfg)
    : cfg_(cfg), m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {
    cfg_.validate();
}

namespace {

void adam_update(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, Eigen::MatrixXd& m, Eigen::MatrixXd& v,
                 const TrainConfig& cfg, double bias1, double bias2) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
    const double step = cfg.learning_rate;
    param.array() -= step * (m.array() / bias1) / ((v.array() / bias2).sqrt() + cfg.adam_epsilon);
}

}  // namespace

void Optimizer::step(Network& net, const Gradients& grads) {
    if (grads.layers.size() != net.depth() || m_.layers.size() != net.depth())
        throw std::invalid_argument("Optimizer::step: gradient layer count does not match network");
    for (std::size_t i = 0; i < net.depth(); ++i) {
        const auto& l = net.layers[i];
        const auto& g = grads.layers[i];
        if (g.dW.rows() != l.W.rows() || g.dW.cols() != l.W.cols() || g.dV.rows() != l.V.rows() ||
            g.dV.cols() != l.V.cols())
            throw std::invalid_argument("Optimizer::step: gradient shape mismatch at layer " + std::to_string(i));
    }
    ++steps_;
    const double bias1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(steps_));
    const double bias2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < net.depth(); ++i) {
        auto& l = net.layers[i];
        const auto& g = grads.layers[i];
        if (cfg_.optimizer == OptimizerKind::sgd) {
            l.W -= cfg_.learning_rate * g.dW;
            if (l.recurrent) l.V -= cfg_.learning_rate * g.dV;
        } else {
            adam_update(l.W, g.dW, m_.layers[i].dW, v_.layers[i].dW, cfg_, bias1, bias2);
            if (l.recurrent) adam_update(l.V, g.dV, m_.layers[i].dV, v_.layers[i].dV, cfg_, bias1, bias2);
        }
    }
}

Label argmax_counts(std::span<const double> counts) {
    return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Trainer::Trainer(Network& net, TrainConfig cfg) : net_(net), cfg_(cfg), optimizer_(net, cfg) {}

EpochMetrics Trainer::run_epoch(std::span<const LabeledTensor> data) {
    if (data.empty()) throw std::invalid_argument("Trainer::run_epoch: empty training data");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(cfg_.seed, "shuffle", epoch_);
    std::shuffle(order.begin(), order.end(), rng);

    struct SampleResult {
        Gradients grads;
        double loss = 0.0;
        bool correct = false;
    };

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
        const std::size_t count = std::min(cfg_.batch_size, order.size() - start);
        std::vector<SampleResult> results(count);
        parallel_for(count, cfg_.threads, [&](std::size_t b) {
            const auto& sample = data[order[start + b]];
            const auto trace = record_trace(net_, sample.tensor);
            const auto counts = trace.output_counts();
            auto loss = softmax_cross_entropy(counts, sample.label);
            results[b].loss = loss.loss;
            results[b].correct = argmax_counts(counts) == sample.label;
            results[b].grads = bptt_backward(net_, trace, loss.grad, cfg_.surrogate_slope);
        });

        Gradients batch = Gradients::zeros_like(net_);
        for (const auto& r : results) {
            batch += r.grads;
            loss_sum += r.loss;
            correct += r.correct ? 1 : 0;
        }
        batch *= 1.0 / static_cast<double>(count);
        optimizer_.step(net_, batch);
    }

    EpochMetrics m;
    m.epoch = epoch_++;
    m.loss = loss_sum / static_cast<double>(data.size());
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return m;
}

std::vector<EpochMetrics> train_epochs(Network& net, std::span<const LabeledTensor> data, const TrainConfig& cfg,
                                       const std::function<void(const EpochMetrics&)>& on_epoch) {
    if (data.empty()) throw std::invalid_argument("train_epochs: empty training data");
    Trainer trainer(net, cfg);
    std::vector<EpochMetrics> history;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        history.push_back(trainer.run_epoch(data));
        if (on_epoch) on_epoch(history.back());
    }
    return history;
}

Label predict(const Network& net, const SpikeTensor& input) {
    const auto counts = network_output(net, input).counts_per_neuron();
    std::vector<double> scores(counts.begin(), counts.end());
    return argmax_counts(scores);
}

std::vector<Label> predict_all(const Network& net, const SpikeSet& set, std::size_t threads) {
    std::vector<Label> out(set.size());
    parallel_for(set.size(), threads, [&](std::size_t i) { out[i] = predict(net, set[i].tensor); });
    return out;
}

double accuracy_of(const SpikeSet& set, const std::vector<Label>& predictions, const SampleFilter& filter) {
    if (predictions.size() != set.size()) throw std::invalid_argument("accuracy_of: prediction count != set size");
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!filter.matches(set[i])) continue;
        ++total;
        correct += predictions[i] == set[i].class_id ? 1 : 0;
    }
    if (total == 0) throw std::invalid_argument("accuracy_of: filter selects no samples");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double evaluate(const Network& net, const SpikeSet& set, const SampleFilter& filter, std::size_t threads) {
    const auto subset = set.subset(filter);
    if (subset.empty()) throw std::invalid_argument("evaluate: filter selects no samples");
    return accuracy_of(subset, predict_all(net, subset, threads));
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "adam") return OptimizerKind::adam;
    if (name == "sgd") return OptimizerKind::sgd;
    throw std::invalid_argument("unknown optimizer '" + name + "' (expected adam or sgd)");
}

}  // namespace spiking_replay
