#include "spiking_replay/spike_tensor.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace spiking_replay {

namespace {

void check_dims(std::size_t timesteps, std::size_t neurons) {
    if (timesteps == 0 || neurons == 0)
        throw std::invalid_argument("SpikeTensor: dimensions must be nonzero, got " + std::to_string(timesteps) + "x" +
                                    std::to_string(neurons));
}

}  // namespace

SpikeTensor::SpikeTensor(std::size_t timesteps, std::size_t neurons) : timesteps_(timesteps), neurons_(neurons) {
    check_dims(timesteps, neurons);
    bits_.assign(payload_bytes_for(timesteps, neurons), 0);
}

SpikeTensor::SpikeTensor(std::size_t timesteps, std::size_t neurons, std::vector<std::uint8_t> payload)
    : timesteps_(timesteps), neurons_(neurons), bits_(std::move(payload)) {
    check_dims(timesteps, neurons);
    if (bits_.size() != payload_bytes_for(timesteps, neurons))
        throw std::invalid_argument("SpikeTensor: payload has " + std::to_string(bits_.size()) + " bytes, expected " +
                                    std::to_string(payload_bytes_for(timesteps, neurons)));
    const std::size_t used = timesteps * neurons;
    if (used % 8 != 0) {
        const auto pad_mask = static_cast<std::uint8_t>(0xFFu << (used % 8));
        if (bits_.back() & pad_mask) throw std::invalid_argument("SpikeTensor: nonzero pad bits");
    }
}

SpikeTensor SpikeTensor::pack(const DenseSpikes& dense) {
    if (dense.empty() || dense.front().empty())
        throw std::invalid_argument("SpikeTensor::pack: dimensions must be nonzero");
    SpikeTensor out(dense.size(), dense.front().size());
    for (std::size_t t = 0; t < dense.size(); ++t) {
        if (dense[t].size() != out.neurons_)
            throw std::invalid_argument("SpikeTensor::pack: ragged input at row " + std::to_string(t));
        for (std::size_t n = 0; n < out.neurons_; ++n)
            if (dense[t][n]) out.set_unchecked(t, n);
    }
    return out;
}

DenseSpikes SpikeTensor::unpack() const {
    DenseSpikes dense(timesteps_, std::vector<bool>(neurons_, false));
    for (std::size_t t = 0; t < timesteps_; ++t)
        for (std::size_t n = 0; n < neurons_; ++n) dense[t][n] = test(t, n);
    return dense;
}

bool SpikeTensor::get(std::size_t t, std::size_t n) const {
    if (t >= timesteps_ || n >= neurons_)
        throw std::invalid_argument("SpikeTensor::get: index (" + std::to_string(t) + ", " + std::to_string(n) +
                                    ") out of range");
    return test(t, n);
}

void SpikeTensor::set(std::size_t t, std::size_t n, bool value) {
    if (t >= timesteps_ || n >= neurons_)
        throw std::invalid_argument("SpikeTensor::set: index (" + std::to_string(t) + ", " + std::to_string(n) +
                                    ") out of range");
    const std::size_t i = t * neurons_ + n;
    const auto mask = static_cast<std::uint8_t>(1u << (i & 7));
    if (value)
        bits_[i >> 3] |= mask;
    else
        bits_[i >> 3] &= static_cast<std::uint8_t>(~mask);
}

std::size_t SpikeTensor::popcount() const noexcept {
    std::size_t total = 0;
    for (auto byte : bits_) total += static_cast<std::size_t>(std::popcount(byte));
    return total;
}

std::vector<std::uint32_t> SpikeTensor::counts_per_neuron() const {
    std::vector<std::uint32_t> counts(neurons_, 0);
    for (std::size_t t = 0; t < timesteps_; ++t)
        for (std::size_t n = 0; n < neurons_; ++n) counts[n] += test(t, n) ? 1u : 0u;
    return counts;
}

std::uint64_t fingerprint(const SpikeTensor& tensor, std::uint64_t seed) {
    constexpr std::uint64_t prime = 0x100000001b3ULL;
    std::uint64_t h = seed;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFFu;
            h *= prime;
        }
    };
    mix(tensor.timesteps());
    mix(tensor.neurons());
    for (auto byte : tensor.payload()) {
        h ^= byte;
        h *= prime;
    }
    return h;
}

}  // namespace spiking_replay
