#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include "spiking_replay/synth.hpp"
#include "spiking_replay/trainer.hpp"

using namespace spiking_replay;

namespace {

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("default spec gives 4 classes x 2 scenarios x 50 samples of 100x64") {
    const SynthSpec spec;
    const auto set = generate_spikeset(spec, 1);
    CHECK(set.size() == 400);
    CHECK(set.timesteps() == 100);
    CHECK(set.neurons() == 64);
    std::map<std::pair<Label, Label>, int> groups;
    for (std::size_t i = 0; i < set.size(); ++i) ++groups[{set[i].class_id, set[i].scenario_id}];
    CHECK(groups.size() == 8);
    for (const auto& [key, n] : groups) CHECK(n == 50);

    const auto dir = std::filesystem::temp_directory_path() / "spiking_replay_tests";
    std::filesystem::create_directories(dir);
    save_spikeset(set, dir / "synth.spks");
    CHECK(std::filesystem::file_size(dir / "synth.spks") == spikeset_file_bytes(100, 64, 400));
    const auto back = load_spikeset(dir / "synth.spks");
    CHECK(back.size() == 400);
    CHECK(back[123].tensor == set[123].tensor);
}

TEST_CASE("generation is a pure function of (spec, seed)") {
    const auto dir = std::filesystem::temp_directory_path() / "spiking_replay_tests";
    std::filesystem::create_directories(dir);
    SynthSpec spec;
    spec.samples_per_group = 5;
    save_spikeset(generate_spikeset(spec, 9), dir / "a.spks");
    save_spikeset(generate_spikeset(spec, 9), dir / "b.spks");
    save_spikeset(generate_spikeset(spec, 10), dir / "c.spks");
    CHECK(file_bytes(dir / "a.spks") == file_bytes(dir / "b.spks"));
    CHECK(file_bytes(dir / "a.spks") != file_bytes(dir / "c.spks"));
}

TEST_CASE("spikes are sparse and class-dependent") {
    const SynthSpec spec;
    const auto set = generate_spikeset(spec, 3);
    double rate = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) rate += double(set[i].tensor.popcount()) / (100.0 * 64.0);
    rate /= double(set.size());
    // every timestep has active_fraction of neurons at rate_active, the rest at rate_background
    const double expected = 0.15 * 0.4 + 0.85 * 0.02;
    CHECK(rate == doctest::Approx(expected).epsilon(0.15));
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.classes = 1;
    CHECK_THROWS_AS(generate_spikeset(spec, 1), std::invalid_argument);
    spec = {};
    spec.scenarios = 0;
    CHECK_THROWS_AS(generate_spikeset(spec, 1), std::invalid_argument);
    spec = {};
    spec.rate_active = 1.5;
    CHECK_THROWS_AS(generate_spikeset(spec, 1), std::invalid_argument);
}

TEST_CASE("a classifier trained on scenario 0 scores lower on scenario 1") {
    double total_gap = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthSpec spec;
        spec.samples_per_group = 30;
        const auto split = stratified_split(generate_spikeset(spec, seed), 0.2, seed);
        NetworkShape shape;
        shape.sizes = {64, 32, 4};
        auto net = make_network(shape, seed);
        TrainConfig cfg;
        cfg.learning_rate = 5e-3;
        cfg.surrogate_slope = 5.0;
        cfg.epochs = 20;
        cfg.seed = seed;
        std::vector<LabeledTensor> data;
        for (auto i : split.train.indices(SampleFilter::of_scenarios({0})))
            data.push_back({split.train[i].tensor, split.train[i].class_id});
        train_epochs(net, data, cfg);
        const double a0 = evaluate(net, split.test, SampleFilter::of_scenarios({0}));
        const double a1 = evaluate(net, split.test, SampleFilter::of_scenarios({1}));
        INFO("seed " << seed << ": scenario 0 " << a0 << ", scenario 1 " << a1);
        CHECK(a0 - a1 >= 0.05);
        total_gap += a0 - a1;
    }
    CHECK(total_gap / 5.0 >= 0.05);
}
