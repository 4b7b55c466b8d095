#include "spiking_replay/replay_buffer.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

#include "spiking_replay/errors.hpp"
#include "spiking_replay/parallel.hpp"
#include "spiking_replay/rng.hpp"

namespace spiking_replay {

ReplayBuffer::ReplayBuffer(CodecSpec codec, std::size_t layer_index, std::size_t neurons, std::size_t timesteps)
    : codec_(codec), layer_index_(layer_index), neurons_(neurons), timesteps_(timesteps) {
    if (neurons == 0 || timesteps == 0) throw std::invalid_argument("ReplayBuffer: dimensions must be nonzero");
    codec_.validate(timesteps);
    entry_bits_ = codec_.entry_bits(timesteps, neurons);
}

std::map<Label, std::size_t> ReplayBuffer::per_class_counts() const {
    std::map<Label, std::size_t> counts;
    for (auto l : labels_) ++counts[l];
    return counts;
}

std::vector<std::size_t> ReplayBuffer::entries_of(Label class_id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == class_id) out.push_back(i);
    return out;
}

void ReplayBuffer::add(const SpikeTensor& latent, Label label) {
    if (latent.timesteps() != timesteps_ || latent.neurons() != neurons_)
        throw std::invalid_argument("ReplayBuffer::add: latent shape " + std::to_string(latent.timesteps()) + "x" +
                                    std::to_string(latent.neurons()) + " does not match buffer shape " +
                                    std::to_string(timesteps_) + "x" + std::to_string(neurons_));
    BitWriter writer(payload_, size() * entry_bits_);
    encode_latent(latent, codec_, writer);
    labels_.push_back(label);
}

SpikeTensor ReplayBuffer::decompress(std::size_t i) const {
    if (i >= size()) throw std::out_of_range("ReplayBuffer::decompress: index out of range");
    BitReader reader(payload_, i * entry_bits_);
    return decode_latent(reader, codec_, timesteps_, neurons_);
}

SpikeTensor latent_at_split(const Network& frozen, const SpikeTensor& input) { return network_output(frozen, input); }

ReplayBuffer capture_latents(const Network& frozen, const SpikeSet& samples, const CodecSpec& codec,
                             std::size_t threads) {
    if (!frozen.empty() && samples.neurons() != frozen.input_size())
        throw std::invalid_argument("capture_latents: samples have " + std::to_string(samples.neurons()) +
                                    " neurons, frozen network expects " + std::to_string(frozen.input_size()));
    const std::size_t neurons = frozen.empty() ? samples.neurons() : frozen.output_size();
    codec.validate(samples.timesteps());
    ReplayBuffer buffer(codec, frozen.depth(), neurons, samples.timesteps());

    std::vector<SpikeTensor> latents(samples.size());
    parallel_for(samples.size(), threads,
                 [&](std::size_t i) { latents[i] = latent_at_split(frozen, samples[i].tensor); });
    for (std::size_t i = 0; i < samples.size(); ++i) buffer.add(latents[i], samples[i].class_id);
    return buffer;
}

std::size_t memory_footprint(const ReplayBuffer& buffer) { return buffer.footprint_bytes(); }

std::vector<LabeledTensor> mix_for_training(const ReplayBuffer& buffer, const std::vector<LabeledTensor>& new_latents,
                                            std::uint64_t seed) {
    std::vector<LabeledTensor> stream;
    stream.reserve(buffer.size() + new_latents.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) stream.push_back({buffer.decompress(i), buffer.labels()[i]});
    for (const auto& item : new_latents) {
        if (!buffer.empty() &&
            (item.tensor.timesteps() != buffer.timesteps() || item.tensor.neurons() != buffer.neurons()))
            throw std::invalid_argument("mix_for_training: new latent shape " +
                                        std::to_string(item.tensor.timesteps()) + "x" +
                                        std::to_string(item.tensor.neurons()) + " does not match replay shape " +
                                        std::to_string(buffer.timesteps()) + "x" + std::to_string(buffer.neurons()));
        stream.push_back(item);
    }
    auto rng = make_rng(seed, "mix");
    std::shuffle(stream.begin(), stream.end(), rng);
    return stream;
}

ReplayBuffer buffer_extend(const ReplayBuffer& buffer, const std::vector<LabeledTensor>& new_entries,
                           std::size_t per_class_quota) {
    ReplayBuffer out = buffer;
    std::map<Label, std::size_t> added;
    for (const auto& entry : new_entries) {
        auto& n = added[entry.label];
        if (n >= per_class_quota) continue;
        out.add(entry.tensor, entry.label);
        ++n;
    }
    return out;
}

std::vector<std::size_t> select_replay_indices(const SpikeSet& set, const SampleFilter& filter, std::size_t total,
                                               std::uint64_t seed) {
    std::map<Label, std::vector<std::size_t>> by_class;
    for (auto i : set.indices(filter)) by_class[set[i].class_id].push_back(i);
    if (by_class.empty() || total == 0) return {};

    auto rng = make_rng(seed, "replay-select");
    const std::size_t classes = by_class.size();
    std::vector<std::size_t> chosen;
    std::size_t k = 0;
    for (auto& [label, pool] : by_class) {
        const std::size_t quota = total / classes + (k++ < total % classes ? 1 : 0);
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::size_t take = std::min(quota, pool.size());
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<std::filesystem::path> save_buffer(const ReplayBuffer& buffer, const std::filesystem::path& path) {
    using json = nlohmann::json;
    const auto blob = path.parent_path() / (path.stem().string() + ".payload.bin");
    json header;
    header["format"] = "spiking-replay-buffer";
    header["version"] = 1;
    header["codec"] = {{"kind", to_string(buffer.codec().kind)},
                       {"ratio", buffer.codec().ratio},
                       {"threshold", buffer.codec().threshold}};
    header["layer_index"] = buffer.layer_index();
    header["neurons"] = buffer.neurons();
    header["timesteps"] = buffer.timesteps();
    header["entries"] = buffer.size();
    header["payload_bytes"] = buffer.payload().size();
    header["payload"] = blob.filename().string();
    json counts = json::object();
    for (const auto& [label, n] : buffer.per_class_counts()) counts[std::to_string(label)] = n;
    header["per_class_counts"] = counts;
    header["labels"] = buffer.labels();

    std::ofstream bin(blob, std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("cannot open " + blob.string() + " for writing");
    bin.write(reinterpret_cast<const char*>(buffer.payload().data()),
              static_cast<std::streamsize>(buffer.payload().size()));
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << header.dump(2) << '\n';
    return {path, blob};
}

ReplayBuffer load_buffer(const std::filesystem::path& path) {
    using json = nlohmann::json;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json header;
    try {
        header = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("replay buffer header: ") + e.what(), e.byte);
    }
    if (header.value("format", "") != "spiking-replay-buffer")
        throw FormatError("replay buffer: unknown format tag", 0);

    CodecSpec codec{codec_kind_from_string(header.at("codec").at("kind").get<std::string>()),
                    header.at("codec").at("ratio").get<std::size_t>(),
                    header.at("codec").at("threshold").get<std::size_t>()};
    ReplayBuffer buffer(codec, header.at("layer_index").get<std::size_t>(), header.at("neurons").get<std::size_t>(),
                        header.at("timesteps").get<std::size_t>());
    buffer.labels_ = header.at("labels").get<std::vector<Label>>();

    const auto blob = path.parent_path() / header.at("payload").get<std::string>();
    std::ifstream bin(blob, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + blob.string());
    buffer.payload_.assign(std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>());
    const auto expected = bytes_for_bits(buffer.labels_.size() * buffer.entry_bits_);
    if (buffer.payload_.size() != expected)
        throw FormatError("replay buffer payload has " + std::to_string(buffer.payload_.size()) + " bytes, expected " +
                              std::to_string(expected),
                          std::min(buffer.payload_.size(), expected));
    return buffer;
}

}  // namespace spiking_replay
