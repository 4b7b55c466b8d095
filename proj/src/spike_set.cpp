#include "spiking_replay/spike_set.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "spiking_replay/errors.hpp"

namespace spiking_replay {

SpikeSet::SpikeSet(std::size_t timesteps, std::size_t neurons, std::uint16_t num_classes, std::uint16_t num_scenarios)
    : timesteps_(timesteps), neurons_(neurons), num_classes_(num_classes), num_scenarios_(num_scenarios) {
    if (timesteps == 0 || neurons == 0) throw std::invalid_argument("SpikeSet: dimensions must be nonzero");
}

void SpikeSet::add(Sample sample) {
    if (sample.tensor.timesteps() != timesteps_ || sample.tensor.neurons() != neurons_)
        throw std::invalid_argument("SpikeSet::add: tensor shape " + std::to_string(sample.tensor.timesteps()) + "x" +
                                    std::to_string(sample.tensor.neurons()) + " does not match set shape " +
                                    std::to_string(timesteps_) + "x" + std::to_string(neurons_));
    if (sample.class_id >= num_classes_)
        throw std::invalid_argument("SpikeSet::add: class_id " + std::to_string(sample.class_id) + " >= num_classes " +
                                    std::to_string(num_classes_));
    if (sample.scenario_id >= num_scenarios_)
        throw std::invalid_argument("SpikeSet::add: scenario_id " + std::to_string(sample.scenario_id) +
                                    " >= num_scenarios " + std::to_string(num_scenarios_));
    samples_.push_back(std::move(sample));
}

std::vector<std::size_t> SpikeSet::indices(const SampleFilter& filter) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples_.size(); ++i)
        if (filter.matches(samples_[i])) out.push_back(i);
    return out;
}

SpikeSet SpikeSet::subset(const SampleFilter& filter) const { return subset(indices(filter)); }

SpikeSet SpikeSet::subset(const std::vector<std::size_t>& idx) const {
    SpikeSet out(timesteps_, neurons_, num_classes_, num_scenarios_);
    out.samples_.reserve(idx.size());
    for (auto i : idx) out.samples_.push_back(samples_.at(i));
    return out;
}

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in bounded chunks.
    constexpr std::size_t chunk = 1u << 30;
    while (size > 0) {
        const auto n = static_cast<uInt>(std::min(size, chunk));
        crc = crc32(crc, data, n);
        data += n;
        size -= n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::size_t spikeset_file_bytes(std::size_t timesteps, std::size_t neurons, std::size_t samples) {
    return kSpikeSetHeaderBytes + samples * (4 + SpikeTensor::payload_bytes_for(timesteps, neurons)) +
           kSpikeSetTrailerBytes;
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

class Cursor {
public:
    explicit Cursor(const std::vector<std::uint8_t>& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

    template <typename T>
    T get(const char* field) {
        require(sizeof(T), field);
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return value;
    }

    std::vector<std::uint8_t> take(std::size_t n, const char* field) {
        require(n, field);
        std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

    std::size_t pos() const { return pos_; }

private:
    void require(std::size_t n, const char* field) const {
        if (pos_ + n > limit_) throw FormatError(std::string("SpikeSet: truncated while reading ") + field, pos_);
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_spikeset(const SpikeSet& set) {
    std::vector<std::uint8_t> out;
    out.reserve(spikeset_file_bytes(set.timesteps(), set.neurons(), set.size()));
    for (char c : {'S', 'P', 'K', 'S'}) out.push_back(static_cast<std::uint8_t>(c));
    put_le<std::uint16_t>(out, kSpikeSetVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.timesteps()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.neurons()));
    put_le<std::uint16_t>(out, set.num_classes());
    put_le<std::uint16_t>(out, set.num_scenarios());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.size()));
    for (const auto& s : set.samples()) {
        put_le<std::uint16_t>(out, s.class_id);
        put_le<std::uint16_t>(out, s.scenario_id);
        out.insert(out.end(), s.tensor.payload().begin(), s.tensor.payload().end());
    }
    put_le<std::uint32_t>(out, crc32_of(out.data(), out.size()));
    return out;
}

SpikeSet decode_spikeset(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kSpikeSetHeaderBytes + kSpikeSetTrailerBytes)
        throw FormatError("SpikeSet: file shorter than header and checksum", bytes.size());
    if (!(bytes[0] == 'S' && bytes[1] == 'P' && bytes[2] == 'K' && bytes[3] == 'S'))
        throw FormatError("SpikeSet: bad magic", 0);

    const std::size_t body = bytes.size() - kSpikeSetTrailerBytes;
    Cursor cur(bytes, body);
    cur.take(4, "magic");
    const auto version = cur.get<std::uint16_t>("version");
    if (version != kSpikeSetVersion) throw FormatError("SpikeSet: unsupported version " + std::to_string(version), 4);
    const auto timesteps = cur.get<std::uint32_t>("timesteps");
    const auto neurons = cur.get<std::uint32_t>("neurons");
    const auto num_classes = cur.get<std::uint16_t>("num_classes");
    const auto num_scenarios = cur.get<std::uint16_t>("num_scenarios");
    const auto count = cur.get<std::uint32_t>("sample_count");
    if (timesteps == 0 || neurons == 0) throw FormatError("SpikeSet: zero dimension in header", 6);

    const std::size_t expected = spikeset_file_bytes(timesteps, neurons, count);
    if (bytes.size() < expected) throw FormatError("SpikeSet: truncated file", bytes.size());
    if (bytes.size() > expected) throw FormatError("SpikeSet: trailing bytes after checksum", expected);

    Cursor crc_cur(bytes, bytes.size());
    crc_cur.take(body, "body");
    const auto stored_crc = crc_cur.get<std::uint32_t>("checksum");
    if (stored_crc != crc32_of(bytes.data(), body)) throw FormatError("SpikeSet: checksum mismatch", body);

    SpikeSet set(timesteps, neurons, num_classes, num_scenarios);
    const std::size_t payload = SpikeTensor::payload_bytes_for(timesteps, neurons);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t record_at = cur.pos();
        const auto class_id = cur.get<std::uint16_t>("class_id");
        const auto scenario_id = cur.get<std::uint16_t>("scenario_id");
        auto data = cur.take(payload, "payload");
        try {
            set.add(Sample{SpikeTensor(timesteps, neurons, std::move(data)), class_id, scenario_id});
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string("SpikeSet: invalid sample record: ") + e.what(), record_at);
        }
    }
    return set;
}

void save_spikeset(const SpikeSet& set, const std::filesystem::path& path) {
    const auto bytes = encode_spikeset(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

SpikeSet load_spikeset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_spikeset(bytes);
}

}  // namespace spiking_replay

#include <algorithm>
#include <cmath>
#include <map>

#include "spiking_replay/rng.hpp"

namespace spiking_replay {

TrainTestSplit stratified_split(const SpikeSet& set, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("stratified_split: test fraction must lie in [0, 1)");
    std::map<std::pair<Label, Label>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < set.size(); ++i) groups[{set[i].class_id, set[i].scenario_id}].push_back(i);

    auto rng = make_rng(seed, "split");
    std::vector<std::size_t> train_idx, test_idx;
    for (auto& [key, members] : groups) {
        std::shuffle(members.begin(), members.end(), rng);
        const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(members.size())));
        test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {set.subset(train_idx), set.subset(test_idx)};
}

}  // namespace spiking_replay
