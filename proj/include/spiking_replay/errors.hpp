#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spiking_replay {

// Contract violations use std::invalid_argument; the two types below carry
// the extra location data callers need to diagnose a failure.

/// Raised when a simulation or gradient value becomes NaN or infinite.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t layer, std::size_t timestep)
        : std::runtime_error(what + " (layer " + std::to_string(layer) + ", timestep " + std::to_string(timestep) +
                             ")"),
          layer_(layer),
          timestep_(timestep) {}

    std::size_t layer() const noexcept { return layer_; }
    std::size_t timestep() const noexcept { return timestep_; }

private:
    std::size_t layer_;
    std::size_t timestep_;
};

/// Raised when a persisted file does not match its declared format.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace spiking_replay
