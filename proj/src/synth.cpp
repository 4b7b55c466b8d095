#include "spiking_replay/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "spiking_replay/rng.hpp"

namespace spiking_replay {

void SynthSpec::validate() const {
    if (classes < 2) throw std::invalid_argument("synth: need at least 2 classes");
    if (scenarios < 1) throw std::invalid_argument("synth: need at least 1 scenario");
    if (timesteps == 0 || neurons == 0) throw std::invalid_argument("synth: dimensions must be nonzero");
    if (segments == 0 || segments > timesteps)
        throw std::invalid_argument("synth: segments must lie in [1, timesteps]");
    if (!(active_fraction > 0.0 && active_fraction <= 1.0))
        throw std::invalid_argument("synth: active_fraction must lie in (0, 1]");
    if (!(rate_active >= 0.0 && rate_active <= 1.0) || !(rate_background >= 0.0 && rate_background <= 1.0))
        throw std::invalid_argument("synth: rates must lie in [0, 1]");
}

SpikeSet generate_spikeset(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t T = spec.timesteps;
    const std::size_t N = spec.neurons;
    const auto active_count = std::max<std::size_t>(1, static_cast<std::size_t>(spec.active_fraction * double(N)));

    // active[c][segment] = neuron mask of the class template
    std::vector<std::vector<std::vector<bool>>> active(spec.classes);
    auto template_rng = make_rng(seed, "synth-template");
    std::vector<std::size_t> ids(N);
    for (auto& cls : active) {
        cls.resize(spec.segments);
        for (auto& mask : cls) {
            std::iota(ids.begin(), ids.end(), 0);
            std::shuffle(ids.begin(), ids.end(), template_rng);
            mask.assign(N, false);
            for (std::size_t k = 0; k < active_count; ++k) mask[ids[k]] = true;
        }
    }

    SpikeSet set(T, N, spec.classes, spec.scenarios);
    auto sample_rng = make_rng(seed, "synth-sample");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<long> jitter_dist(-static_cast<long>(spec.jitter), static_cast<long>(spec.jitter));
    const auto wrap = [](long v, std::size_t m) {
        return static_cast<std::size_t>(((v % long(m)) + long(m)) % long(m));
    };

    for (Label c = 0; c < spec.classes; ++c)
        for (Label s = 0; s < spec.scenarios; ++s)
            for (std::size_t k = 0; k < spec.samples_per_group; ++k) {
                const long offset = static_cast<long>(s * spec.scenario_time_offset) + jitter_dist(sample_rng);
                const long shift = static_cast<long>(s * spec.scenario_neuron_shift);
                SpikeTensor tensor(T, N);
                for (std::size_t t = 0; t < T; ++t) {
                    const std::size_t src_t = wrap(static_cast<long>(t) - offset, T);
                    const auto& mask = active[c][src_t * spec.segments / T];
                    for (std::size_t n = 0; n < N; ++n) {
                        const bool on = mask[wrap(static_cast<long>(n) - shift, N)];
                        if (unit(sample_rng) < (on ? spec.rate_active : spec.rate_background))
                            tensor.set_unchecked(t, n);
                    }
                }
                set.add(Sample{std::move(tensor), c, s});
            }
    return set;
}

}  // namespace spiking_replay
