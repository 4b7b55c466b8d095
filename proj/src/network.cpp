#include "spiking_replay/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spiking_replay/errors.hpp"
#include "spiking_replay/rng.hpp"

namespace spiking_replay {

RecurrentLayer::RecurrentLayer(std::size_t in, std::size_t out, NeuronParams p, bool rec)
    : W(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
      V(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(out))),
      params(p),
      recurrent(rec) {
    validate();
}

void RecurrentLayer::validate() const {
    if (W.rows() == 0 || W.cols() == 0) throw std::invalid_argument("RecurrentLayer: W must be nonempty");
    if (V.rows() != W.rows() || V.cols() != W.rows())
        throw std::invalid_argument("RecurrentLayer: V must be square with side rows(W)");
    if (!(params.alpha >= 0.0 && params.alpha < 1.0))
        throw std::invalid_argument("RecurrentLayer: alpha must lie in [0, 1)");
    if (!(params.beta >= 0.0 && params.beta < 1.0))
        throw std::invalid_argument("RecurrentLayer: beta must lie in [0, 1)");
    if (!(params.theta > 0.0) || !std::isfinite(params.theta))
        throw std::invalid_argument("RecurrentLayer: theta must be positive");
    if (!recurrent && !V.isZero(0.0)) throw std::invalid_argument("RecurrentLayer: non-recurrent layer has nonzero V");
}

namespace {

// One timestep of the LIF recurrence. `active_in` and `active_prev` list the
// indices of input and previous-output spikes in ascending order, so the
// summation order is identical for every caller.
void advance(const RecurrentLayer& layer, const std::vector<Eigen::Index>& active_in,
             const std::vector<Eigen::Index>& active_prev, Eigen::VectorXd& syn, Eigen::VectorXd& mem) {
    syn *= layer.params.alpha;
    for (auto j : active_in) syn += layer.W.col(j);
    if (layer.recurrent)
        for (auto j : active_prev) syn += layer.V.col(j);
    mem = layer.params.beta * mem + syn;
    for (auto j : active_prev) mem[j] -= layer.params.theta;
}

}  // namespace

std::vector<bool> layer_step(const RecurrentLayer& layer, const std::vector<bool>& input, LayerState& state) {
    const auto out = layer.outputs();
    if (input.size() != layer.inputs())
        throw std::invalid_argument("layer_step: input has " + std::to_string(input.size()) +
                                    " neurons, layer expects " + std::to_string(layer.inputs()));
    if (static_cast<std::size_t>(state.syn.size()) != out || static_cast<std::size_t>(state.mem.size()) != out ||
        state.spk_prev.size() != out)
        throw std::invalid_argument("layer_step: state size does not match layer output size");
    if (!state.finite()) throw NumericError("layer_step: non-finite state", 0, 0);

    std::vector<Eigen::Index> active_in, active_prev;
    for (std::size_t j = 0; j < input.size(); ++j)
        if (input[j]) active_in.push_back(static_cast<Eigen::Index>(j));
    for (std::size_t j = 0; j < out; ++j)
        if (state.spk_prev[j]) active_prev.push_back(static_cast<Eigen::Index>(j));

    advance(layer, active_in, active_prev, state.syn, state.mem);
    std::vector<bool> spikes(out);
    for (std::size_t n = 0; n < out; ++n) spikes[n] = state.mem[static_cast<Eigen::Index>(n)] >= layer.params.theta;
    state.spk_prev = spikes;
    return spikes;
}

SpikeTensor layer_forward(const RecurrentLayer& layer, const SpikeTensor& input, LayerTrace* trace) {
    if (input.neurons() != layer.inputs())
        throw std::invalid_argument("layer_forward: input has " + std::to_string(input.neurons()) +
                                    " neurons, layer expects " + std::to_string(layer.inputs()));
    const auto T = input.timesteps();
    const auto out = static_cast<Eigen::Index>(layer.outputs());
    SpikeTensor output(T, layer.outputs());

    if (trace) {
        trace->input = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layer.inputs()), static_cast<Eigen::Index>(T));
        trace->syn.resize(out, static_cast<Eigen::Index>(T));
        trace->mem.resize(out, static_cast<Eigen::Index>(T));
        trace->spikes = Eigen::MatrixXd::Zero(out, static_cast<Eigen::Index>(T));
    }

    Eigen::VectorXd syn = Eigen::VectorXd::Zero(out);
    Eigen::VectorXd mem = Eigen::VectorXd::Zero(out);
    std::vector<Eigen::Index> active_in, active_prev, active_now;
    active_in.reserve(layer.inputs());
    active_prev.reserve(layer.outputs());
    active_now.reserve(layer.outputs());

    for (std::size_t t = 0; t < T; ++t) {
        active_in.clear();
        for (std::size_t j = 0; j < input.neurons(); ++j)
            if (input.test(t, j)) active_in.push_back(static_cast<Eigen::Index>(j));

        advance(layer, active_in, active_prev, syn, mem);
        if (!mem.allFinite()) throw NumericError("layer_forward: non-finite membrane potential", 0, t);

        active_now.clear();
        for (Eigen::Index n = 0; n < out; ++n) {
            if (mem[n] >= layer.params.theta) {
                active_now.push_back(n);
                output.set_unchecked(t, static_cast<std::size_t>(n));
            }
        }
        if (trace) {
            const auto c = static_cast<Eigen::Index>(t);
            for (auto j : active_in) trace->input(j, c) = 1.0;
            trace->syn.col(c) = syn;
            trace->mem.col(c) = mem;
            for (auto n : active_now) trace->spikes(n, c) = 1.0;
        }
        std::swap(active_prev, active_now);
    }
    return output;
}

void Network::validate() const {
    if (layers.empty()) return;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (i + 1 < layers.size() && layers[i].outputs() != layers[i + 1].inputs())
            throw std::invalid_argument("Network: layer " + std::to_string(i) + " output size " +
                                        std::to_string(layers[i].outputs()) + " != layer " + std::to_string(i + 1) +
                                        " input size " + std::to_string(layers[i + 1].inputs()));
    }
    if (split_index >= layers.size()) throw std::invalid_argument("Network: split index must be < depth");
}

Network make_network(const NetworkShape& shape, std::uint64_t seed) {
    if (shape.sizes.size() < 2) throw std::invalid_argument("make_network: need an input size and at least one layer");
    Rng rng = make_rng(seed, "init");
    Network net;
    for (std::size_t i = 0; i + 1 < shape.sizes.size(); ++i) {
        const auto in = shape.sizes[i];
        const auto out = shape.sizes[i + 1];
        const bool last = i + 2 == shape.sizes.size();
        RecurrentLayer layer(in, out, shape.params, !last || shape.recurrent_output);
        std::uniform_real_distribution<double> w_dist(-shape.init_gain / std::sqrt(double(in)),
                                                      shape.init_gain / std::sqrt(double(in)));
        for (Eigen::Index c = 0; c < layer.W.cols(); ++c)
            for (Eigen::Index r = 0; r < layer.W.rows(); ++r) layer.W(r, c) = w_dist(rng);
        if (layer.recurrent) {
            std::uniform_real_distribution<double> v_dist(-shape.init_gain / std::sqrt(double(out)),
                                                          shape.init_gain / std::sqrt(double(out)));
            for (Eigen::Index c = 0; c < layer.V.cols(); ++c)
                for (Eigen::Index r = 0; r < layer.V.rows(); ++r) layer.V(r, c) = v_dist(rng);
        }
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

std::vector<SpikeTensor> network_forward(const Network& net, const SpikeTensor& input) {
    std::vector<SpikeTensor> outputs;
    outputs.reserve(net.depth());
    const SpikeTensor* current = &input;
    for (std::size_t i = 0; i < net.depth(); ++i) {
        try {
            outputs.push_back(layer_forward(net.layers[i], *current));
        } catch (const NumericError& e) {
            throw NumericError("network_forward: non-finite membrane potential", i, e.timestep());
        }
        current = &outputs.back();
    }
    return outputs;
}

SpikeTensor network_output(const Network& net, const SpikeTensor& input) {
    if (net.empty()) return input;
    SpikeTensor current = layer_forward(net.layers.front(), input);
    for (std::size_t i = 1; i < net.depth(); ++i) current = layer_forward(net.layers[i], current);
    return current;
}

SplitNetwork split_network(const Network& net, std::size_t K) {
    if (K >= net.depth())
        throw std::invalid_argument("split_network: K=" + std::to_string(K) + " must be < depth " +
                                    std::to_string(net.depth()));
    SplitNetwork parts;
    parts.frozen.layers.assign(net.layers.begin(), net.layers.begin() + static_cast<std::ptrdiff_t>(K));
    parts.learning.layers.assign(net.layers.begin() + static_cast<std::ptrdiff_t>(K), net.layers.end());
    return parts;
}

Network join_networks(const Network& frozen, const Network& learning) {
    Network net;
    net.layers = frozen.layers;
    net.layers.insert(net.layers.end(), learning.layers.begin(), learning.layers.end());
    net.split_index = frozen.depth();
    net.validate();
    return net;
}

std::uint64_t weight_fingerprint(const Network& net, std::size_t first_layer, std::size_t last_layer) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t i = first_layer; i < last_layer && i < net.depth(); ++i) {
        const auto& l = net.layers[i];
        mix_bytes(l.W.data(), sizeof(double) * static_cast<std::size_t>(l.W.size()));
        mix_bytes(l.V.data(), sizeof(double) * static_cast<std::size_t>(l.V.size()));
    }
    return h;
}

}  // namespace spiking_replay
