#include "spiking_replay/codec.hpp"

#include <stdexcept>

namespace spiking_replay {

void CodecSpec::validate(std::size_t timesteps) const {
    if (ratio == 0) throw std::invalid_argument("CodecSpec: compression ratio must be >= 1");
    if (kind == CodecKind::chunk_threshold && (threshold == 0 || threshold > ratio))
        throw std::invalid_argument("CodecSpec: threshold must lie in [1, ratio], got " + std::to_string(threshold) +
                                    " with ratio " + std::to_string(ratio));
    if (timesteps != 0 && kind != CodecKind::aggregate_count && timesteps % ratio != 0)
        throw std::invalid_argument("CodecSpec: " + std::to_string(timesteps) + " timesteps not divisible by ratio " +
                                    std::to_string(ratio));
}

unsigned CodecSpec::value_bits(std::size_t timesteps) const {
    switch (kind) {
        case CodecKind::chunk_threshold: return 1;
        case CodecKind::aggregate_count: return bits_for_max(timesteps);
        case CodecKind::hybrid_count: return bits_for_max(ratio);
    }
    return 1;
}

std::size_t CodecSpec::values_per_neuron(std::size_t timesteps) const {
    return kind == CodecKind::aggregate_count ? 1 : timesteps / ratio;
}

std::size_t CodecSpec::entry_bits(std::size_t timesteps, std::size_t neurons) const {
    return neurons * values_per_neuron(timesteps) * value_bits(timesteps);
}

std::string to_string(CodecKind kind) {
    switch (kind) {
        case CodecKind::chunk_threshold: return "chunk_threshold";
        case CodecKind::aggregate_count: return "aggregate_count";
        case CodecKind::hybrid_count: return "hybrid_count";
    }
    return "unknown";
}

CodecKind codec_kind_from_string(const std::string& name) {
    if (name == "chunk_threshold") return CodecKind::chunk_threshold;
    if (name == "aggregate_count" || name == "aggregate") return CodecKind::aggregate_count;
    if (name == "hybrid_count" || name == "hybrid") return CodecKind::hybrid_count;
    throw std::invalid_argument("unknown codec '" + name + "'");
}

namespace {

void require_divisible(std::size_t length, std::size_t ratio, const char* who) {
    if (ratio == 0) throw std::invalid_argument(std::string(who) + ": ratio must be >= 1");
    if (length % ratio != 0)
        throw std::invalid_argument(std::string(who) + ": length " + std::to_string(length) +
                                    " not divisible by ratio " + std::to_string(ratio));
}

}  // namespace

SpikeTrain compress_chunk_threshold(const SpikeTrain& seq, std::size_t ratio, std::size_t threshold) {
    CodecSpec{CodecKind::chunk_threshold, ratio, threshold}.validate(seq.size());
    SpikeTrain out(seq.size() / ratio, false);
    for (std::size_t c = 0; c < out.size(); ++c) {
        std::size_t spikes = 0;
        for (std::size_t t = c * ratio; t < (c + 1) * ratio; ++t) spikes += seq[t] ? 1 : 0;
        out[c] = spikes >= threshold;
    }
    return out;
}

SpikeTrain decompress_chunk_threshold(const SpikeTrain& compressed, std::size_t ratio) {
    if (ratio == 0) throw std::invalid_argument("decompress_chunk_threshold: ratio must be >= 1");
    SpikeTrain out(compressed.size() * ratio, false);
    for (std::size_t c = 0; c < compressed.size(); ++c) out[c * ratio] = compressed[c];
    return out;
}

std::uint32_t compress_aggregate(const SpikeTrain& seq) {
    std::uint32_t count = 0;
    for (bool s : seq) count += s ? 1u : 0u;
    return count;
}

SpikeTrain expand_aggregate(std::uint32_t count, std::size_t timesteps) {
    if (count > timesteps)
        throw std::invalid_argument("expand_aggregate: count " + std::to_string(count) + " exceeds " +
                                    std::to_string(timesteps) + " timesteps");
    SpikeTrain out(timesteps, false);
    for (std::uint32_t t = 0; t < count; ++t) out[t] = true;
    return out;
}

std::vector<std::uint32_t> compress_hybrid(const SpikeTrain& seq, std::size_t ratio) {
    require_divisible(seq.size(), ratio, "compress_hybrid");
    std::vector<std::uint32_t> counts(seq.size() / ratio, 0);
    for (std::size_t t = 0; t < seq.size(); ++t) counts[t / ratio] += seq[t] ? 1u : 0u;
    return counts;
}

SpikeTrain expand_hybrid(const std::vector<std::uint32_t>& counts, std::size_t ratio) {
    if (ratio == 0) throw std::invalid_argument("expand_hybrid: ratio must be >= 1");
    SpikeTrain out(counts.size() * ratio, false);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > ratio)
            throw std::invalid_argument("expand_hybrid: chunk " + std::to_string(c) + " count " +
                                        std::to_string(counts[c]) + " exceeds ratio " + std::to_string(ratio));
        for (std::uint32_t k = 0; k < counts[c]; ++k) out[c * ratio + k] = true;
    }
    return out;
}

void encode_latent(const SpikeTensor& latent, const CodecSpec& codec, BitWriter& out) {
    const auto T = latent.timesteps();
    const auto N = latent.neurons();
    codec.validate(T);
    const unsigned width = codec.value_bits(T);
    switch (codec.kind) {
        case CodecKind::chunk_threshold:
            for (std::size_t c = 0; c < T / codec.ratio; ++c)
                for (std::size_t n = 0; n < N; ++n) {
                    std::size_t spikes = 0;
                    for (std::size_t t = c * codec.ratio; t < (c + 1) * codec.ratio; ++t) spikes += latent.test(t, n);
                    out.write(spikes >= codec.threshold ? 1u : 0u, width);
                }
            break;
        case CodecKind::aggregate_count: {
            const auto counts = latent.counts_per_neuron();
            for (std::size_t n = 0; n < N; ++n) out.write(counts[n], width);
            break;
        }
        case CodecKind::hybrid_count:
            for (std::size_t c = 0; c < T / codec.ratio; ++c)
                for (std::size_t n = 0; n < N; ++n) {
                    std::uint32_t spikes = 0;
                    for (std::size_t t = c * codec.ratio; t < (c + 1) * codec.ratio; ++t) spikes += latent.test(t, n);
                    out.write(spikes, width);
                }
            break;
    }
}

SpikeTensor decode_latent(BitReader& in, const CodecSpec& codec, std::size_t timesteps, std::size_t neurons) {
    codec.validate(timesteps);
    const unsigned width = codec.value_bits(timesteps);
    SpikeTensor out(timesteps, neurons);
    switch (codec.kind) {
        case CodecKind::chunk_threshold:
            for (std::size_t c = 0; c < timesteps / codec.ratio; ++c)
                for (std::size_t n = 0; n < neurons; ++n)
                    if (in.read(width)) out.set_unchecked(c * codec.ratio, n);
            break;
        case CodecKind::aggregate_count:
            for (std::size_t n = 0; n < neurons; ++n) {
                const auto count = in.read(width);
                if (count > timesteps) throw std::invalid_argument("decode_latent: aggregate count exceeds timesteps");
                for (std::uint32_t t = 0; t < count; ++t) out.set_unchecked(t, n);
            }
            break;
        case CodecKind::hybrid_count:
            for (std::size_t c = 0; c < timesteps / codec.ratio; ++c)
                for (std::size_t n = 0; n < neurons; ++n) {
                    const auto count = in.read(width);
                    if (count > codec.ratio) throw std::invalid_argument("decode_latent: chunk count exceeds ratio");
                    for (std::uint32_t k = 0; k < count; ++k) out.set_unchecked(c * codec.ratio + k, n);
                }
            break;
    }
    return out;
}

std::size_t footprint_bytes(const CodecSpec& codec, std::size_t entries, std::size_t neurons, std::size_t timesteps) {
    return bytes_for_bits(entries * codec.entry_bits(timesteps, neurons));
}

}  // namespace spiking_replay
