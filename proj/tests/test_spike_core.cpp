#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "spiking_replay/bit_stream.hpp"
#include "spiking_replay/errors.hpp"
#include "spiking_replay/spike_set.hpp"

using namespace spiking_replay;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
    auto dir = fs::temp_directory_path() / "spiking_replay_tests";
    fs::create_directories(dir);
    return dir / name;
}

SpikeSet synthetic_set(std::size_t samples, std::uint64_t seed) {
    SpikeSet set(10, 13, 4, 3);
    for (std::size_t i = 0; i < samples; ++i)
        set.add({oracle::random_tensor(10, 13, 0.3, seed + i), Label(i % 4), Label(i % 3)});
    return set;
}

}  // namespace

TEST_CASE("pack: all-zero 2x2 has one payload byte and no spikes") {
    auto t = SpikeTensor::pack({{false, false}, {false, false}});
    CHECK(t.payload_bytes() == 1);
    CHECK(t.popcount() == 0);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) CHECK_FALSE(t.get(r, c));
}

TEST_CASE("pack: 1x8 row sets exactly bits 0 and 7") {
    auto t = SpikeTensor::pack({{true, false, false, false, false, false, false, true}});
    REQUIRE(t.payload_bytes() == 1);
    for (std::size_t i = 0; i < 8; ++i) CHECK(((t.payload()[0] >> i) & 1) == ((i == 0 || i == 7) ? 1 : 0));
    CHECK(oracle::bit_at(t, 0, 7));
    CHECK(t.get(0, 7));
    CHECK(t.popcount() == 2);
}

TEST_CASE("pack: 100x700 random matrix roundtrips bit-exactly") {
    std::mt19937_64 rng(11);
    std::bernoulli_distribution bit(0.2);
    DenseSpikes dense(100, std::vector<bool>(700));
    std::size_t ones = 0;
    for (auto& row : dense)
        for (std::size_t n = 0; n < 700; ++n) ones += (row[n] = bit(rng));
    auto t = SpikeTensor::pack(dense);
    CHECK(t.payload_bytes() == 100 * 700 / 8);
    CHECK(t.unpack() == dense);
    CHECK(t.popcount() == ones);
}

TEST_CASE("get agrees with independent indexing on 1000 random probes") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution bit(0.5);
    DenseSpikes dense(37, std::vector<bool>(29));
    for (auto& row : dense)
        for (std::size_t n = 0; n < 29; ++n) row[n] = bit(rng);
    auto t = SpikeTensor::pack(dense);
    std::uniform_int_distribution<std::size_t> tr(0, 36), nr(0, 28);
    for (int i = 0; i < 1000; ++i) {
        const auto a = tr(rng), b = nr(rng);
        CHECK(t.get(a, b) == dense[a][b]);
        CHECK(oracle::bit_at(t, a, b) == dense[a][b]);
    }
}

TEST_CASE("property: pack/unpack identity, padding zero, popcount consistent") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t T = 1 + rng() % 17, N = 1 + rng() % 23;
        auto t = oracle::random_tensor(T, N, 0.4, rng());
        CHECK(t.payload_bytes() == (T * N + 7) / 8);
        CHECK(SpikeTensor::pack(t.unpack()) == t);
        std::size_t sum = 0;
        for (std::size_t a = 0; a < T; ++a)
            for (std::size_t b = 0; b < N; ++b) sum += t.get(a, b);
        CHECK(sum == t.popcount());
        const std::size_t used = T * N;
        if (used % 8) CHECK((t.payload().back() >> (used % 8)) == 0);
    }
}

TEST_CASE("SpikeTensor rejects bad dimensions and indices") {
    CHECK_THROWS_AS(SpikeTensor(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(SpikeTensor(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(SpikeTensor::pack({}), std::invalid_argument);
    SpikeTensor t(2, 3);
    CHECK_THROWS_AS(t.get(2, 0), std::invalid_argument);
    CHECK_THROWS_AS(t.get(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(SpikeTensor(1, 3, std::vector<std::uint8_t>{0x08}), std::invalid_argument);  // pad bit set
}

TEST_CASE("bit stream: mixed-width fields roundtrip") {
    std::vector<std::uint8_t> buf;
    BitWriter w(buf);
    w.write(5, 3);
    w.write(1, 1);
    w.write(100, 7);
    w.write(0, 2);
    CHECK(w.bit_position() == 13);
    CHECK(buf.size() == 2);
    BitReader r(buf);
    CHECK(r.read(3) == 5);
    CHECK(r.read(1) == 1);
    CHECK(r.read(7) == 100);
    CHECK(r.read(2) == 0);
    CHECK_THROWS(w.write(8, 3));
    CHECK(bits_for_max(100) == 7);
    CHECK(bits_for_max(1) == 1);
    CHECK(bits_for_max(2) == 2);
    CHECK(bits_for_max(20) == 5);
}

TEST_CASE("SpikeSet invariants are enforced on add") {
    SpikeSet set(4, 5, 2, 1);
    CHECK_THROWS_AS(set.add({SpikeTensor(4, 6), 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(set.add({SpikeTensor(4, 5), 2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(set.add({SpikeTensor(4, 5), 0, 1}), std::invalid_argument);
    set.add({SpikeTensor(4, 5), 1, 0});
    CHECK(set.size() == 1);
}

TEST_CASE("SpikeSet file: empty set roundtrips") {
    SpikeSet empty(100, 700, 20, 12);
    const auto path = temp_path("empty.spks");
    save_spikeset(empty, path);
    CHECK(fs::file_size(path) == kSpikeSetHeaderBytes + kSpikeSetTrailerBytes);
    CHECK(load_spikeset(path) == empty);
}

TEST_CASE("SpikeSet file: 20-sample set roundtrips with the exact size") {
    const auto set = synthetic_set(20, 3);
    const auto path = temp_path("twenty.spks");
    save_spikeset(set, path);
    // 22-byte header, 20 x (2 + 2 + ceil(130 / 8)) records, 4-byte CRC
    CHECK(fs::file_size(path) == 22 + 20 * (4 + 17) + 4);
    CHECK(spikeset_file_bytes(10, 13, 20) == fs::file_size(path));
    CHECK(load_spikeset(path) == set);
}

TEST_CASE("SpikeSet file: header fields are little-endian at fixed offsets") {
    const auto bytes = encode_spikeset(synthetic_set(2, 1));
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SPKS");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 10);   // T
    CHECK(bytes[10] == 13);  // N
    CHECK(bytes[14] == 4);   // classes
    CHECK(bytes[16] == 3);   // scenarios
    CHECK(bytes[18] == 2);   // count
    const auto crc = crc32_of(bytes.data(), bytes.size() - 4);
    for (int i = 0; i < 4; ++i) CHECK(bytes[bytes.size() - 4 + i] == std::uint8_t(crc >> (8 * i)));
}

TEST_CASE("SpikeSet file: corruption is reported as a format error with an offset") {
    auto bytes = encode_spikeset(synthetic_set(5, 9));

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        try {
            decode_spikeset(bytes);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() == 0);
        }
    }
    SUBCASE("truncated") {
        bytes.resize(bytes.size() - 10);
        CHECK_THROWS_AS(decode_spikeset(bytes), FormatError);
    }
    SUBCASE("tiny") {
        bytes.resize(7);
        CHECK_THROWS_AS(decode_spikeset(bytes), FormatError);
    }
    SUBCASE("checksum mismatch") {
        bytes[30] ^= 0x01;
        try {
            decode_spikeset(bytes);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() == bytes.size() - 4);
        }
    }
}

TEST_CASE("File roundtrip is byte-size deterministic") {
    const auto a = encode_spikeset(synthetic_set(7, 21));
    const auto b = encode_spikeset(synthetic_set(7, 21));
    CHECK(a == b);
}

TEST_CASE("stratified split is deterministic and covers every sample once") {
    const auto set = synthetic_set(60, 4);
    const auto s1 = stratified_split(set, 0.25, 17);
    const auto s2 = stratified_split(set, 0.25, 17);
    CHECK(s1.train == s2.train);
    CHECK(s1.test == s2.test);
    CHECK(s1.train.size() + s1.test.size() == 60);
    // 12 (class, scenario) groups of 5, round(0.25 * 5) = 1 each
    CHECK(s1.test.size() == 12);
}
