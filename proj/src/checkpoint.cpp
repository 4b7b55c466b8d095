#include "spiking_replay/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <stdexcept>
#include <string>

#include "spiking_replay/errors.hpp"

namespace spiking_replay {

namespace {

using json = nlohmann::json;

void append_matrix(std::vector<std::uint8_t>& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const auto bits = std::bit_cast<std::uint64_t>(m(r, c));
            for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
}

std::size_t read_matrix(const std::vector<std::uint8_t>& in, std::size_t offset, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
            m(r, c) = std::bit_cast<double>(bits);
            offset += 8;
        }
    return offset;
}

std::filesystem::path blob_path(const std::filesystem::path& manifest, std::size_t layer) {
    auto name = manifest.stem().string() + ".layer" + std::to_string(layer) + ".bin";
    return manifest.parent_path() / name;
}

}  // namespace

std::vector<std::filesystem::path> save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto& net = ckpt.network;
    net.validate();
    std::vector<std::filesystem::path> written;
    json manifest;
    manifest["format"] = "spiking-replay-checkpoint";
    manifest["version"] = 1;
    manifest["seed"] = ckpt.seed;
    manifest["split_index"] = net.split_index;
    manifest["layers"] = json::array();
    for (std::size_t i = 0; i < net.depth(); ++i) {
        const auto& l = net.layers[i];
        std::vector<std::uint8_t> blob;
        blob.reserve(8 * static_cast<std::size_t>(l.W.size() + l.V.size()));
        append_matrix(blob, l.W);
        append_matrix(blob, l.V);
        const auto bp = blob_path(path, i);
        std::ofstream out(bp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + bp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
        written.push_back(bp);
        manifest["layers"].push_back({{"inputs", l.inputs()},
                                      {"outputs", l.outputs()},
                                      {"alpha", l.params.alpha},
                                      {"beta", l.params.beta},
                                      {"theta", l.params.theta},
                                      {"recurrent", l.recurrent},
                                      {"blob", bp.filename().string()}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << manifest.dump(2) << '\n';
    written.insert(written.begin(), path);
    return written;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("checkpoint manifest: ") + e.what(), e.byte);
    }
    if (manifest.value("format", "") != "spiking-replay-checkpoint")
        throw FormatError("checkpoint manifest: unknown format tag", 0);

    Checkpoint ckpt;
    ckpt.seed = manifest.value("seed", std::uint64_t{0});
    for (std::size_t i = 0; i < manifest.at("layers").size(); ++i) {
        const auto& spec = manifest["layers"][i];
        NeuronParams p{spec.at("alpha").get<double>(), spec.at("beta").get<double>(), spec.at("theta").get<double>()};
        RecurrentLayer layer(spec.at("inputs").get<std::size_t>(), spec.at("outputs").get<std::size_t>(), p,
                             spec.at("recurrent").get<bool>());
        const auto bp = path.parent_path() / spec.at("blob").get<std::string>();
        std::ifstream bin(bp, std::ios::binary);
        if (!bin) throw std::runtime_error("cannot open " + bp.string());
        std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
        const std::size_t expected = 8 * static_cast<std::size_t>(layer.W.size() + layer.V.size());
        if (blob.size() != expected)
            throw FormatError("checkpoint blob " + bp.filename().string() + " has " + std::to_string(blob.size()) +
                                  " bytes, expected " + std::to_string(expected),
                              std::min(blob.size(), expected));
        read_matrix(blob, read_matrix(blob, 0, layer.W), layer.V);
        layer.validate();
        ckpt.network.layers.push_back(std::move(layer));
    }
    ckpt.network.split_index = manifest.at("split_index").get<std::size_t>();
    ckpt.network.validate();
    return ckpt;
}

}  // namespace spiking_replay
