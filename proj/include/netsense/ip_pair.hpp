#pragma once

#include <cstdint>

namespace netsense {

// IPv4 (source, destination) pair. Addresses are host-order integers built
// from the big-endian wire bytes, so 10.0.0.1 is 0x0A000001.
struct IpPair {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;

    bool operator==(const IpPair&) const = default;
};

}  // namespace netsense
