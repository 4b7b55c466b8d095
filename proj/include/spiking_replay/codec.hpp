#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spiking_replay/bit_stream.hpp"
#include "spiking_replay/spike_tensor.hpp"

namespace spiking_replay {

/// A single neuron's spike train over time.
using SpikeTrain = std::vector<bool>;

enum class CodecKind {
    chunk_threshold,  ///< one bit per chunk: spike iff the chunk holds >= threshold spikes
    aggregate_count,  ///< one spike count per whole sequence
    hybrid_count,     ///< one spike count per chunk
};

struct CodecSpec {
    CodecKind kind = CodecKind::chunk_threshold;
    std::size_t ratio = 1;      ///< C_r, timesteps folded into one chunk
    std::size_t threshold = 1;  ///< chunk_threshold only

    /// Checks the spec on its own and, when `timesteps` is nonzero, that it
    /// divides the sequence length. Throws std::invalid_argument.
    void validate(std::size_t timesteps = 0) const;

    /// Width in bits of each stored value.
    unsigned value_bits(std::size_t timesteps) const;
    /// Stored values per neuron for a sequence of `timesteps`.
    std::size_t values_per_neuron(std::size_t timesteps) const;
    /// Exact payload bits for one latent of shape [timesteps x neurons].
    std::size_t entry_bits(std::size_t timesteps, std::size_t neurons) const;

    friend bool operator==(const CodecSpec&, const CodecSpec&) = default;
};

std::string to_string(CodecKind kind);
CodecKind codec_kind_from_string(const std::string& name);

// Per-sequence codecs. Lengths must be divisible by the ratio.
SpikeTrain compress_chunk_threshold(const SpikeTrain& seq, std::size_t ratio, std::size_t threshold);
/// Places each compressed spike at the first timestep of its chunk.
SpikeTrain decompress_chunk_threshold(const SpikeTrain& compressed, std::size_t ratio);

std::uint32_t compress_aggregate(const SpikeTrain& seq);
/// Sets timesteps [0, count) and clears the rest.
SpikeTrain expand_aggregate(std::uint32_t count, std::size_t timesteps);

std::vector<std::uint32_t> compress_hybrid(const SpikeTrain& seq, std::size_t ratio);
/// Places count[i] spikes at the start of chunk i.
SpikeTrain expand_hybrid(const std::vector<std::uint32_t>& counts, std::size_t ratio);

/// Compresses every neuron of a latent raster and appends the values,
/// time-major (compressed step outer, neuron inner), to `out`.
void encode_latent(const SpikeTensor& latent, const CodecSpec& codec, BitWriter& out);

/// Reads one encoded latent and expands it back to [timesteps x neurons].
SpikeTensor decode_latent(BitReader& in, const CodecSpec& codec, std::size_t timesteps, std::size_t neurons);

/// Closed-form payload size of `entries` latents, rounded up to whole bytes.
std::size_t footprint_bytes(const CodecSpec& codec, std::size_t entries, std::size_t neurons, std::size_t timesteps);

}  // namespace spiking_replay
