#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "netsense/ip_pair.hpp"
#include "netsense/pcap.hpp"

namespace netsense {

// Seeded synthetic traffic. Source/destination address pools are disjoint
// deterministic functions of the seed; per-packet popularity is Zipf with
// the given exponents (0 = uniform).
struct SynthConfig {
    std::uint64_t seed = 0;
    std::uint64_t n_packets = 0;
    std::uint64_t n_sources = 1;
    std::uint64_t n_destinations = 1;
    double source_exponent = 0.0;
    double destination_exponent = 0.0;
    std::uint32_t link_type = kLinkTypeEthernet;
    std::uint64_t timestamp_start = 0;
    std::uint64_t inter_packet_micros = 0;
    // Fraction of extra non-IPv4 frames (ARP on Ethernet, a version-6
    // header on raw IP) interleaved into the capture to exercise skip
    // paths. Does not change the generated pair list.
    double noise_fraction = 0.0;
};

// Zipf(s) over {0..n-1}: P(i) proportional to 1/(i+1)^s. Weights are
// quantized to integers once at construction, so draws are integer-exact
// and reproduce across platforms.
class ZipfSampler {
public:
    ZipfSampler(std::uint64_t n, double exponent);

    // Maps one uniform 64-bit draw to an index.
    std::uint64_t sample(std::uint64_t uniform) const;

    std::uint64_t size() const { return cumulative_.size(); }

private:
    std::vector<std::uint64_t> cumulative_;
    std::uint64_t total_ = 0;
};

std::vector<IpPair> generate_pairs(const SynthConfig& config);

// The two disjoint address pools generate_pairs draws from (exposed for
// tests and for marker-address checks).
std::vector<std::uint32_t> source_pool(const SynthConfig& config);
std::vector<std::uint32_t> destination_pool(const SynthConfig& config);

// Classic pcap, little-endian microsecond. Each pair becomes a minimal
// frame (Ethernet + IPv4 header, or a bare IPv4 header for raw IP) whose
// checksum is left zero. `pair_offset` shifts timestamps and the noise
// stream when a pair list is split across several captures.
void write_pcap(std::span<const IpPair> pairs, const SynthConfig& config, std::ostream& out,
                std::uint64_t pair_offset = 0);
void write_pcap_file(std::span<const IpPair> pairs, const SynthConfig& config,
                     const std::filesystem::path& path, std::uint64_t pair_offset = 0);

}  // namespace netsense
