#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace spiking_replay {

// Fixed-width unsigned fields packed LSB-first into a byte stream. Bit i of
// the stream lives in byte i / 8 at position i % 8, the same convention
// SpikeTensor uses, so a width-1 stream is bit-identical to a spike payload.

inline std::size_t bytes_for_bits(std::size_t bits) { return (bits + 7) / 8; }

/// Number of bits needed to store any value in [0, max_value].
inline unsigned bits_for_max(std::uint64_t max_value) {
    unsigned bits = 0;
    while (max_value > 0) {
        ++bits;
        max_value >>= 1;
    }
    return bits == 0 ? 1 : bits;
}

class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out, std::size_t bit_offset = 0) : out_(out), cursor_(bit_offset) {}

    void write(std::uint32_t value, unsigned width) {
        if (width == 0 || width > 32) throw std::invalid_argument("BitWriter: width must be in [1, 32]");
        if (width < 32 && (value >> width) != 0)
            throw std::invalid_argument("BitWriter: value does not fit in field width");
        const std::size_t end = cursor_ + width;
        if (out_.size() < bytes_for_bits(end)) out_.resize(bytes_for_bits(end), 0);
        for (unsigned b = 0; b < width; ++b, ++cursor_) {
            const auto mask = static_cast<std::uint8_t>(1u << (cursor_ % 8));
            if ((value >> b) & 1u)
                out_[cursor_ / 8] |= mask;
            else
                out_[cursor_ / 8] &= static_cast<std::uint8_t>(~mask);
        }
    }

    std::size_t bit_position() const { return cursor_; }

private:
    std::vector<std::uint8_t>& out_;
    std::size_t cursor_;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> in, std::size_t bit_offset = 0) : in_(in), cursor_(bit_offset) {}

    std::uint32_t read(unsigned width) {
        if (width == 0 || width > 32) throw std::invalid_argument("BitReader: width must be in [1, 32]");
        if (cursor_ + width > in_.size() * 8) throw std::out_of_range("BitReader: read past end of stream");
        std::uint32_t value = 0;
        for (unsigned b = 0; b < width; ++b, ++cursor_)
            value |= static_cast<std::uint32_t>((in_[cursor_ / 8] >> (cursor_ % 8)) & 1u) << b;
        return value;
    }

    std::size_t bit_position() const { return cursor_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t cursor_;
};

}  // namespace spiking_replay
