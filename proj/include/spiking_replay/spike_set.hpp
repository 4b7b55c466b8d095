#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <vector>

#include "spiking_replay/spike_tensor.hpp"

namespace spiking_replay {

using Label = std::uint16_t;

struct Sample {
    SpikeTensor tensor;
    Label class_id = 0;
    Label scenario_id = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Restricts a SpikeSet to a subset of classes and/or scenarios. An unset
/// field matches everything.
struct SampleFilter {
    std::optional<std::set<Label>> classes;
    std::optional<std::set<Label>> scenarios;

    bool matches(const Sample& s) const {
        return (!classes || classes->contains(s.class_id)) && (!scenarios || scenarios->contains(s.scenario_id));
    }

    static SampleFilter all() { return {}; }
    static SampleFilter of_classes(std::set<Label> c) { return {std::move(c), std::nullopt}; }
    static SampleFilter of_scenarios(std::set<Label> s) { return {std::nullopt, std::move(s)}; }
};

/// Labeled collection of equally shaped spike tensors.
class SpikeSet {
public:
    SpikeSet() = default;
    SpikeSet(std::size_t timesteps, std::size_t neurons, std::uint16_t num_classes, std::uint16_t num_scenarios);

    /// Validates labels and shape against the declared dimensions.
    void add(Sample sample);

    std::size_t timesteps() const noexcept { return timesteps_; }
    std::size_t neurons() const noexcept { return neurons_; }
    std::uint16_t num_classes() const noexcept { return num_classes_; }
    std::uint16_t num_scenarios() const noexcept { return num_scenarios_; }

    const std::vector<Sample>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    /// Indices of the samples accepted by the filter, in storage order.
    std::vector<std::size_t> indices(const SampleFilter& filter) const;
    SpikeSet subset(const SampleFilter& filter) const;
    SpikeSet subset(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const SpikeSet&, const SpikeSet&) = default;

private:
    std::size_t timesteps_ = 0;
    std::size_t neurons_ = 0;
    std::uint16_t num_classes_ = 0;
    std::uint16_t num_scenarios_ = 0;
    std::vector<Sample> samples_;
};

// Binary layout (little-endian):
//   "SPKS" | version u16 | T u32 | N u32 | classes u16 | scenarios u16 | count u32
//   count x { class_id u16 | scenario_id u16 | ceil(T*N/8) payload bytes }
//   CRC32 (zlib polynomial) over every preceding byte
inline constexpr std::uint16_t kSpikeSetVersion = 1;
inline constexpr std::size_t kSpikeSetHeaderBytes = 22;
inline constexpr std::size_t kSpikeSetTrailerBytes = 4;

std::vector<std::uint8_t> encode_spikeset(const SpikeSet& set);
/// Throws FormatError (with the offending byte offset) on malformed input.
SpikeSet decode_spikeset(const std::vector<std::uint8_t>& bytes);

void save_spikeset(const SpikeSet& set, const std::filesystem::path& path);
SpikeSet load_spikeset(const std::filesystem::path& path);

/// Exact encoded size for a set with the given shape and sample count.
std::size_t spikeset_file_bytes(std::size_t timesteps, std::size_t neurons, std::size_t samples);

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size);

}  // namespace spiking_replay

namespace spiking_replay {

struct TrainTestSplit {
    SpikeSet train;
    SpikeSet test;
};

/// Deterministic split stratified by (class, scenario): each group sends
/// round(fraction * size) seeded-random samples to the test side.
TrainTestSplit stratified_split(const SpikeSet& set, double test_fraction, std::uint64_t seed);

}  // namespace spiking_replay
