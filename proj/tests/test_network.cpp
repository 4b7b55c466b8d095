#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "spiking_replay/checkpoint.hpp"
#include "spiking_replay/errors.hpp"
#include "spiking_replay/network.hpp"
#include "spiking_replay/trainer.hpp"

using namespace spiking_replay;

namespace {

RecurrentLayer scalar_layer() {
    RecurrentLayer l(1, 1, NeuronParams{0.0, 0.0, 0.5}, false);
    l.W(0, 0) = 1.0;
    return l;
}

// Steps a layer through a tensor with layer_step, one timestep at a time.
SpikeTensor stepwise(const RecurrentLayer& layer, const SpikeTensor& input) {
    LayerState state(layer.outputs());
    SpikeTensor out(input.timesteps(), layer.outputs());
    for (std::size_t t = 0; t < input.timesteps(); ++t) {
        std::vector<bool> x(input.neurons());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = input.get(t, j);
        const auto s = layer_step(layer, x, state);
        for (std::size_t n = 0; n < s.size(); ++n)
            if (s[n]) out.set(t, n, true);
    }
    return out;
}

Network full_shape_network(std::uint64_t seed) {
    NetworkShape shape;
    shape.sizes = {700, 200, 100, 50, 20};
    return make_network(shape, seed);
}

}  // namespace

TEST_CASE("layer_step: zero weights and state never spike") {
    RecurrentLayer l(4, 3, NeuronParams{}, true);
    LayerState s(3);
    for (int t = 0; t < 10; ++t) {
        const auto out = layer_step(l, {true, false, true, true}, s);
        for (bool b : out) CHECK_FALSE(b);
        CHECK(s.syn.isZero(0.0));
        CHECK(s.mem.isZero(0.0));
    }
}

TEST_CASE("layer_step: scalar recurrence by hand") {
    const auto l = scalar_layer();
    LayerState s(1);
    const auto out = layer_step(l, {true}, s);
    CHECK(s.syn[0] == 1.0);
    CHECK(s.mem[0] == 1.0);
    CHECK(out[0]);
}

TEST_CASE("layer_step: unreachable threshold never spikes over 100 steps") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> w(-0.1, 0.1);
    std::bernoulli_distribution bit(0.3);
    RecurrentLayer l(8, 5, NeuronParams{0.9, 0.8, 1e9}, true);
    for (Eigen::Index i = 0; i < l.W.size(); ++i) l.W.data()[i] = w(rng);
    for (Eigen::Index i = 0; i < l.V.size(); ++i) l.V.data()[i] = w(rng);
    LayerState s(5);
    for (int t = 0; t < 100; ++t) {
        std::vector<bool> x(8);
        for (std::size_t j = 0; j < 8; ++j) x[j] = bit(rng);
        for (bool b : layer_step(l, x, s)) CHECK_FALSE(b);
    }
}

TEST_CASE("layer_step: contract errors") {
    RecurrentLayer l(2, 2, NeuronParams{}, true);
    LayerState s(2);
    CHECK_THROWS_AS(layer_step(l, {true}, s), std::invalid_argument);
    LayerState wrong(3);
    CHECK_THROWS_AS(layer_step(l, {true, false}, wrong), std::invalid_argument);
    s.mem[0] = std::nan("");
    CHECK_THROWS_AS(layer_step(l, {true, false}, s), NumericError);
    CHECK_THROWS_AS(RecurrentLayer(2, 2, NeuronParams{1.0, 0.5, 1.0}, true), std::invalid_argument);
    CHECK_THROWS_AS(RecurrentLayer(2, 2, NeuronParams{0.5, 0.5, 0.0}, true), std::invalid_argument);
}

TEST_CASE("layer_forward: zero input gives zero output") {
    auto net = full_shape_network(1);
    const auto out = layer_forward(net.layers[0], SpikeTensor(100, 700));
    CHECK(out.popcount() == 0);
}

TEST_CASE("layer_forward: scalar train [1,0,0] with V=0 gives [1,0,0]") {
    const auto out = layer_forward(scalar_layer(), SpikeTensor::pack({{true}, {false}, {false}}));
    CHECK(out.unpack() == DenseSpikes{{true}, {false}, {false}});
}

TEST_CASE("layer_forward matches step-by-step simulation and is deterministic") {
    NetworkShape shape;
    shape.sizes = {30, 20, 10};
    shape.init_gain = 2.0;
    const auto net = make_network(shape, 8);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto x = oracle::random_tensor(40, 30, 0.2, seed);
        const auto a = layer_forward(net.layers[0], x);
        CHECK(a == stepwise(net.layers[0], x));
        CHECK(a == layer_forward(net.layers[0], x));
    }
}

TEST_CASE("network_forward: 700-200-100-50-20 shapes") {
    const auto net = full_shape_network(2);
    const auto outs = network_forward(net, oracle::random_tensor(100, 700, 0.05, 1));
    REQUIRE(outs.size() == 4);
    const std::size_t widths[] = {200, 100, 50, 20};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(outs[i].timesteps() == 100);
        CHECK(outs[i].neurons() == widths[i]);
    }
    CHECK_FALSE(net.layers.back().recurrent);
    CHECK(net.layers.back().V.isZero(0.0));
}

TEST_CASE("network_forward: zero input through zero-weight net stays silent") {
    Network net;
    net.layers = {RecurrentLayer(6, 4, {}, true), RecurrentLayer(4, 2, {}, false)};
    for (const auto& o : network_forward(net, oracle::random_tensor(20, 6, 0.5, 2))) CHECK(o.popcount() == 0);
}

TEST_CASE("network_forward: golden digest of all layer outputs") {
    NetworkShape shape;
    shape.sizes = {64, 48, 32, 16, 4};
    shape.init_gain = 2.5;
    const auto net = make_network(shape, 1234);
    const auto input = oracle::random_tensor(100, 64, 0.15, 77);
    const auto outs = network_forward(net, input);

    // Verified against the layer_step oracle before the digest was frozen.
    const SpikeTensor* x = &input;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        CHECK(outs[i] == stepwise(net.layers[i], *x));
        x = &outs[i];
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::size_t spikes = 0;
    for (const auto& o : outs) {
        h = fingerprint(o, h);
        spikes += o.popcount();
    }
    MESSAGE("golden digest " << h << " spikes " << spikes);
    CHECK(spikes > 0);
    CHECK(h == 3857344661792173484ULL);
}

TEST_CASE("split_network: contract and equivalence") {
    NetworkShape shape;
    shape.sizes = {20, 16, 12, 8, 4};
    shape.init_gain = 2.5;
    const auto net = make_network(shape, 5);

    SUBCASE("K=0 keeps everything learning") {
        const auto parts = split_network(net, 0);
        CHECK(parts.frozen.empty());
        CHECK(parts.learning == net);
    }
    SUBCASE("K=L is rejected") { CHECK_THROWS_AS(split_network(net, 4), std::invalid_argument); }
    SUBCASE("K=2 composes to the unsplit forward on 10 inputs") {
        const auto parts = split_network(net, 2);
        CHECK(parts.frozen.depth() == 2);
        CHECK(parts.learning.depth() == 2);
        CHECK(parts.frozen.layers[1] == net.layers[1]);
        CHECK(parts.learning.layers[0] == net.layers[2]);
        for (std::uint64_t s = 0; s < 10; ++s) {
            const auto x = oracle::random_tensor(50, 20, 0.2, s);
            CHECK(network_output(parts.learning, network_output(parts.frozen, x)) == network_forward(net, x).back());
        }
    }
    SUBCASE("every K satisfies split equivalence") {
        const auto x = oracle::random_tensor(50, 20, 0.2, 99);
        const auto whole = network_forward(net, x).back();
        for (std::size_t K = 0; K < net.depth(); ++K) {
            const auto parts = split_network(net, K);
            CHECK(network_output(parts.learning, network_output(parts.frozen, x)) == whole);
            CHECK(join_networks(parts.frozen, parts.learning).layers == net.layers);
        }
    }
}

TEST_CASE("state stays finite over 10^4 steps of random input") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    std::bernoulli_distribution bit(0.5);
    RecurrentLayer l(16, 8, NeuronParams{0.95, 0.95, 1.0}, true);
    for (Eigen::Index i = 0; i < l.W.size(); ++i) l.W.data()[i] = w(rng);
    for (Eigen::Index i = 0; i < l.V.size(); ++i) l.V.data()[i] = w(rng);
    LayerState s(8);
    std::vector<bool> x(16);
    for (int t = 0; t < 10000; ++t) {
        for (std::size_t j = 0; j < 16; ++j) x[j] = bit(rng);
        layer_step(l, x, s);
    }
    CHECK(s.finite());
}

TEST_CASE("batch predictions are identical across thread counts") {
    NetworkShape shape;
    shape.sizes = {32, 24, 6};
    shape.init_gain = 3.0;
    const auto net = make_network(shape, 4);
    SpikeSet set(40, 32, 6, 1);
    for (std::uint64_t i = 0; i < 30; ++i) set.add({oracle::random_tensor(40, 32, 0.2, i), Label(i % 6), 0});
    const auto one = predict_all(net, set, 1);
    CHECK(one == predict_all(net, set, 3));
    CHECK(one == predict_all(net, set, 8));
}

TEST_CASE("checkpoint roundtrip is bit-exact") {
    NetworkShape shape;
    shape.sizes = {12, 9, 5};
    auto net = make_network(shape, 10);
    net.split_index = 1;
    const auto dir = std::filesystem::temp_directory_path() / "spiking_replay_tests";
    std::filesystem::create_directories(dir);
    const auto files = save_checkpoint({net, 10}, dir / "ckpt.json");
    CHECK(files.size() == 3);
    CHECK(std::filesystem::file_size(files[1]) == 8 * (9 * 12 + 9 * 9));
    const auto loaded = load_checkpoint(dir / "ckpt.json");
    CHECK(loaded.network == net);
    CHECK(loaded.seed == 10);

    std::filesystem::resize_file(files[2], 16);
    CHECK_THROWS_AS(load_checkpoint(dir / "ckpt.json"), FormatError);
}
