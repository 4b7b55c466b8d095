#pragma once

#include <cstdint>

#include "spiking_replay/spike_set.hpp"

namespace spiking_replay {

/// Parameters of the synthetic stand-in for a spoken-digit spike dataset.
///
/// Each class owns a spatio-temporal Poisson rate template: the sequence is
/// cut into `segments` equal windows and every window has its own random
/// set of high-rate neurons. Each scenario ("speaker") shifts the template
/// by a fixed temporal offset and a fixed neuron-axis offset; every sample
/// adds its own small temporal jitter.
struct SynthSpec {
    std::uint16_t classes = 4;
    std::uint16_t scenarios = 2;
    std::size_t samples_per_group = 50;  ///< per (class, scenario) pair
    std::size_t timesteps = 100;
    std::size_t neurons = 64;
    std::size_t segments = 4;
    double active_fraction = 0.15;
    double rate_active = 0.4;
    double rate_background = 0.02;
    std::size_t scenario_time_offset = 12;  ///< timesteps per scenario index
    std::size_t scenario_neuron_shift = 4;  ///< neurons per scenario index
    std::size_t jitter = 2;                 ///< max per-sample temporal jitter

    /// Throws std::invalid_argument on an unusable spec.
    void validate() const;
};

/// Samples are emitted class-major, then scenario, then sample index.
SpikeSet generate_spikeset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace spiking_replay
