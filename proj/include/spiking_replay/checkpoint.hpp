#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spiking_replay/network.hpp"

namespace spiking_replay {

struct Checkpoint {
    Network network;
    std::uint64_t seed = 0;
};

/// Writes `<path>` (JSON manifest) and one `<stem>.layer<i>.bin` blob per
/// layer next to it. Each blob holds W then V, row-major, as little-endian
/// IEEE-754 doubles. Returns every file written.
std::vector<std::filesystem::path> save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws FormatError on inconsistent manifests or blob sizes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spiking_replay
