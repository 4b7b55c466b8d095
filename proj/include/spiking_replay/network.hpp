#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "spiking_replay/spike_tensor.hpp"

namespace spiking_replay {

/// Neuron constants shared by a layer.
struct NeuronParams {
    double alpha = 0.9;  ///< synaptic current decay, in [0, 1)
    double beta = 0.8;   ///< membrane decay, in [0, 1)
    double theta = 1.0;  ///< firing threshold, > 0
};

/// Recurrent layer of second-order (synaptic conductance) LIF neurons.
///
/// Per timestep:
///   syn' = alpha * syn + W x + V s_prev
///   mem' = beta * mem + syn' - theta * s_prev      (soft reset)
///   s    = [mem' >= theta]
/// A layer with `recurrent == false` keeps V at zero and never trains it.
struct RecurrentLayer {
    Eigen::MatrixXd W;  ///< [out x in]
    Eigen::MatrixXd V;  ///< [out x out]
    NeuronParams params;
    bool recurrent = true;

    RecurrentLayer() = default;
    RecurrentLayer(std::size_t in, std::size_t out, NeuronParams p, bool recurrent);

    std::size_t inputs() const noexcept { return static_cast<std::size_t>(W.cols()); }
    std::size_t outputs() const noexcept { return static_cast<std::size_t>(W.rows()); }

    /// Throws std::invalid_argument if constants or shapes break the layer invariants.
    void validate() const;

    friend bool operator==(const RecurrentLayer& a, const RecurrentLayer& b) {
        return a.W.rows() == b.W.rows() && a.W.cols() == b.W.cols() && a.W == b.W && a.V == b.V &&
               a.params.alpha == b.params.alpha && a.params.beta == b.params.beta && a.params.theta == b.params.theta &&
               a.recurrent == b.recurrent;
    }
};

struct LayerState {
    Eigen::VectorXd syn;
    Eigen::VectorXd mem;
    std::vector<bool> spk_prev;

    LayerState() = default;
    explicit LayerState(std::size_t n) { reset(n); }
    void reset(std::size_t n) {
        syn = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        mem = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        spk_prev.assign(n, false);
    }
    bool finite() const { return syn.allFinite() && mem.allFinite(); }
};

/// Per-timestep record of one layer's forward pass; columns are timesteps.
/// Spike matrices hold 0/1 for the hard network.
struct LayerTrace {
    Eigen::MatrixXd input;   ///< [in x T]
    Eigen::MatrixXd syn;     ///< [out x T]
    Eigen::MatrixXd mem;     ///< [out x T], before the threshold test
    Eigen::MatrixXd spikes;  ///< [out x T]
};

/// Advances `state` by one timestep and returns the emitted spikes.
/// Throws std::invalid_argument on shape mismatch and NumericError if the
/// incoming state is not finite.
std::vector<bool> layer_step(const RecurrentLayer& layer, const std::vector<bool>& input, LayerState& state);

/// Runs the layer over every timestep of `input` starting from a zero state.
/// When `trace` is non-null it receives the full per-timestep record.
SpikeTensor layer_forward(const RecurrentLayer& layer, const SpikeTensor& input, LayerTrace* trace = nullptr);

/// Ordered stack of recurrent layers with a frozen/learning split index.
struct Network {
    std::vector<RecurrentLayer> layers;
    std::size_t split_index = 0;  ///< number of leading frozen layers (K)

    std::size_t depth() const noexcept { return layers.size(); }
    bool empty() const noexcept { return layers.empty(); }
    std::size_t input_size() const { return layers.front().inputs(); }
    std::size_t output_size() const { return layers.back().outputs(); }

    void validate() const;

    friend bool operator==(const Network&, const Network&) = default;
};

struct NetworkShape {
    std::vector<std::size_t> sizes;  ///< input size followed by each layer's output size
    NeuronParams params;
    double init_gain = 1.0;         ///< multiplies the default uniform init range
    bool recurrent_output = false;  ///< output layer V is forced to zero unless set
};

/// Builds a network with W ~ U(-g/sqrt(in), g/sqrt(in)) and V ~ U(-g/sqrt(out), g/sqrt(out)).
Network make_network(const NetworkShape& shape, std::uint64_t seed);

/// Output of every layer, in order; element K-1 is the latent capture point.
std::vector<SpikeTensor> network_forward(const Network& net, const SpikeTensor& input);

/// Final-layer output only.
SpikeTensor network_output(const Network& net, const SpikeTensor& input);

struct SplitNetwork {
    Network frozen;    ///< layers [0, K)
    Network learning;  ///< layers [K, L)
};

/// Throws std::invalid_argument when K >= L.
SplitNetwork split_network(const Network& net, std::size_t K);
/// Inverse of split_network; the result carries split_index = frozen depth.
Network join_networks(const Network& frozen, const Network& learning);

/// Digest of all weights, used to prove layers were left untouched.
std::uint64_t weight_fingerprint(const Network& net, std::size_t first_layer, std::size_t last_layer);

}  // namespace spiking_replay
