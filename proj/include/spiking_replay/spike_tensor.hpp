#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spiking_replay {

/// Dense boolean matrix indexed [timestep][neuron]; the unpacked form of a SpikeTensor.
using DenseSpikes = std::vector<std::vector<bool>>;

/// Binary spike raster over [timesteps x neurons], bit-packed time-major.
///
/// Bit (t, n) is stored at bit index t * neurons + n, LSB-first within each
/// byte. Padding is applied once per tensor, so the payload is exactly
/// ceil(timesteps * neurons / 8) bytes and every pad bit is zero.
class SpikeTensor {
public:
    SpikeTensor() = default;

    /// All-zero tensor. Throws std::invalid_argument if either dimension is zero.
    SpikeTensor(std::size_t timesteps, std::size_t neurons);

    /// Adopts an existing payload; the size must match and pad bits must be zero.
    SpikeTensor(std::size_t timesteps, std::size_t neurons, std::vector<std::uint8_t> payload);

    static SpikeTensor pack(const DenseSpikes& dense);
    DenseSpikes unpack() const;

    std::size_t timesteps() const noexcept { return timesteps_; }
    std::size_t neurons() const noexcept { return neurons_; }
    bool empty() const noexcept { return timesteps_ == 0; }

    /// Bounds-checked read; throws std::invalid_argument when out of range.
    bool get(std::size_t t, std::size_t n) const;
    void set(std::size_t t, std::size_t n, bool value);

    // Unchecked accessors for inner loops.
    bool test(std::size_t t, std::size_t n) const noexcept {
        const std::size_t i = t * neurons_ + n;
        return (bits_[i >> 3] >> (i & 7)) & 1u;
    }
    void set_unchecked(std::size_t t, std::size_t n) noexcept {
        const std::size_t i = t * neurons_ + n;
        bits_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    }

    std::size_t popcount() const noexcept;
    /// Spikes emitted by each neuron summed over time.
    std::vector<std::uint32_t> counts_per_neuron() const;

    std::span<const std::uint8_t> payload() const noexcept { return bits_; }
    std::size_t payload_bytes() const noexcept { return bits_.size(); }

    static std::size_t payload_bytes_for(std::size_t timesteps, std::size_t neurons) {
        return (timesteps * neurons + 7) / 8;
    }

    friend bool operator==(const SpikeTensor&, const SpikeTensor&) = default;

private:
    std::size_t timesteps_ = 0;
    std::size_t neurons_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// 64-bit FNV-1a digest of shape and payload, used for golden-value checks.
std::uint64_t fingerprint(const SpikeTensor& tensor, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace spiking_replay
