#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "spiking_replay/codec.hpp"
#include "spiking_replay/network.hpp"
#include "spiking_replay/spike_set.hpp"
#include "spiking_replay/trainer.hpp"

namespace spiking_replay {

/// Compressed latent replays captured at one layer with one codec.
///
/// All entries share a single contiguous bit stream: entry i occupies bits
/// [i * entry_bits, (i + 1) * entry_bits). No per-entry padding is stored,
/// so the payload is exactly ceil(entries * entry_bits / 8) bytes.
class ReplayBuffer {
public:
    ReplayBuffer() = default;
    /// `layer_index` is K: 0 means raw network inputs are stored.
    ReplayBuffer(CodecSpec codec, std::size_t layer_index, std::size_t neurons, std::size_t timesteps);

    const CodecSpec& codec() const noexcept { return codec_; }
    std::size_t layer_index() const noexcept { return layer_index_; }
    std::size_t neurons() const noexcept { return neurons_; }
    std::size_t timesteps() const noexcept { return timesteps_; }
    std::size_t entry_bits() const noexcept { return entry_bits_; }

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    const std::vector<Label>& labels() const noexcept { return labels_; }
    std::map<Label, std::size_t> per_class_counts() const;
    /// Entry indices holding `class_id`, in insertion order.
    std::vector<std::size_t> entries_of(Label class_id) const;

    /// Compresses and appends a full-length latent. Throws
    /// std::invalid_argument on a shape mismatch.
    void add(const SpikeTensor& latent, Label label);

    /// Expands entry i back to [timesteps x neurons].
    SpikeTensor decompress(std::size_t i) const;

    /// Payload bytes; metadata (labels, header) is not counted.
    std::size_t footprint_bytes() const noexcept { return bytes_for_bits(size() * entry_bits_); }

    const std::vector<std::uint8_t>& payload() const noexcept { return payload_; }

    friend bool operator==(const ReplayBuffer&, const ReplayBuffer&) = default;

private:
    friend ReplayBuffer load_buffer(const std::filesystem::path& path);

    CodecSpec codec_;
    std::size_t layer_index_ = 0;
    std::size_t neurons_ = 0;
    std::size_t timesteps_ = 0;
    std::size_t entry_bits_ = 0;
    std::vector<Label> labels_;
    std::vector<std::uint8_t> payload_;
};

/// Latent activations at the split point: the frozen network's last layer
/// output, or the raw input when the frozen part is empty.
SpikeTensor latent_at_split(const Network& frozen, const SpikeTensor& input);

/// Runs every sample through `frozen` and stores its compressed latent.
ReplayBuffer capture_latents(const Network& frozen, const SpikeSet& samples, const CodecSpec& codec,
                             std::size_t threads = 1);

std::size_t memory_footprint(const ReplayBuffer& buffer);

/// Decompresses every replay, appends `new_latents`, and shuffles with `seed`.
std::vector<LabeledTensor> mix_for_training(const ReplayBuffer& buffer, const std::vector<LabeledTensor>& new_latents,
                                            std::uint64_t seed);

/// Returns a copy of `buffer` with at most `per_class_quota` of the
/// `new_entries` of each class appended, taken in the order given.
ReplayBuffer buffer_extend(const ReplayBuffer& buffer, const std::vector<LabeledTensor>& new_entries,
                           std::size_t per_class_quota);

/// Class-balanced uniform selection of replay sources from the filtered part
/// of `set`. `total` is split evenly over the classes present (remainder to
/// the lowest classes); classes with too few samples contribute all they
/// have. Returned indices are sorted.
std::vector<std::size_t> select_replay_indices(const SpikeSet& set, const SampleFilter& filter, std::size_t total,
                                               std::uint64_t seed);

/// Writes a JSON header at `path` and the payload to `<stem>.payload.bin`.
std::vector<std::filesystem::path> save_buffer(const ReplayBuffer& buffer, const std::filesystem::path& path);
ReplayBuffer load_buffer(const std::filesystem::path& path);

}  // namespace spiking_replay
