#include "netsense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "netsense/bytes.hpp"
#include "netsense/rng.hpp"

namespace netsense {

namespace {

// Stream-splitting constants so pools, draws and noise decisions come from
// independent deterministic sequences.
constexpr std::uint64_t kPoolStream = 0x706f6f6c73ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

std::uint64_t mulhi(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) >> 64);
}

// Both pools in one pass: the first n_sources distinct addresses become
// sources, the next n_destinations become destinations, which makes the
// pools disjoint by construction.
std::vector<std::uint32_t> combined_pools(const SynthConfig& c) {
    if (c.n_sources == 0 || c.n_destinations == 0) {
        throw std::invalid_argument("address pools must be non-empty");
    }
    const std::uint64_t total = c.n_sources + c.n_destinations;
    if (total > (1ULL << 31)) {
        throw std::invalid_argument("address pools too large");
    }
    SplitMix64 rng(c.seed ^ kPoolStream);
    std::vector<std::uint32_t> pool;
    pool.reserve(total);
    std::unordered_set<std::uint32_t> seen;
    seen.reserve(total * 2);
    while (pool.size() < total) {
        const auto addr = static_cast<std::uint32_t>(rng.next());
        if (seen.insert(addr).second) {
            pool.push_back(addr);
        }
    }
    return pool;
}

void append_ipv4_header(std::vector<std::uint8_t>& frame, std::uint32_t src, std::uint32_t dst) {
    const std::size_t base = frame.size();
    frame.resize(base + 20, 0);
    std::uint8_t* p = frame.data() + base;
    p[0] = 0x45;               // version 4, IHL 5
    store_be16(p + 2, 20);     // total length: header only
    p[8] = 64;                 // TTL
    p[9] = 253;                // protocol: reserved for experimentation
    // checksum stays zero
    store_be32(p + 12, src);
    store_be32(p + 16, dst);
}

void append_ethernet_header(std::vector<std::uint8_t>& frame, std::uint16_t ether_type) {
    static constexpr std::uint8_t kDstMac[6] = {0x02, 0, 0, 0, 0, 0x02};
    static constexpr std::uint8_t kSrcMac[6] = {0x02, 0, 0, 0, 0, 0x01};
    frame.insert(frame.end(), kDstMac, kDstMac + 6);
    frame.insert(frame.end(), kSrcMac, kSrcMac + 6);
    frame.push_back(static_cast<std::uint8_t>(ether_type >> 8));
    frame.push_back(static_cast<std::uint8_t>(ether_type & 0xff));
}

std::vector<std::uint8_t> noise_frame(const SynthConfig& c) {
    std::vector<std::uint8_t> frame;
    if (c.link_type == kLinkTypeEthernet) {
        append_ethernet_header(frame, 0x0806);  // ARP
        // htype=1, ptype=IPv4, hlen=6, plen=4, oper=request, zeroed bodies
        const std::uint8_t arp[28] = {0, 1, 8, 0, 6, 4, 0, 1};
        frame.insert(frame.end(), arp, arp + 28);
    } else {
        frame.resize(20, 0);
        frame[0] = 0x60;  // version-6 nibble: skipped as non-IPv4
    }
    return frame;
}

}  // namespace

ZipfSampler::ZipfSampler(std::uint64_t n, double exponent) {
    if (n == 0) {
        throw std::invalid_argument("ZipfSampler needs n >= 1");
    }
    if (exponent < 0.0) {
        throw std::invalid_argument("Zipf exponent must be >= 0");
    }

    std::vector<double> weights(n);
    double total = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        weights[i] = std::pow(static_cast<double>(i + 1), -exponent);
        total += weights[i];
    }

    // Quantize to integers; all subsequent sampling is integer-exact.
    const double scale = static_cast<double>(1ULL << 62) / total;
    cumulative_.resize(n);
    std::uint64_t acc = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto q = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(weights[i] * scale)));
        acc += q;
        cumulative_[i] = acc;
    }
    total_ = acc;
}

std::uint64_t ZipfSampler::sample(std::uint64_t uniform) const {
    const std::uint64_t r = mulhi(uniform, total_);
    // First index whose cumulative weight exceeds r.
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return static_cast<std::uint64_t>(it - cumulative_.begin());
}

std::vector<std::uint32_t> source_pool(const SynthConfig& config) {
    std::vector<std::uint32_t> pool = combined_pools(config);
    pool.resize(config.n_sources);
    return pool;
}

std::vector<std::uint32_t> destination_pool(const SynthConfig& config) {
    std::vector<std::uint32_t> pool = combined_pools(config);
    return std::vector<std::uint32_t>(pool.begin() + static_cast<std::ptrdiff_t>(config.n_sources),
                                      pool.end());
}

std::vector<IpPair> generate_pairs(const SynthConfig& config) {
    const std::vector<std::uint32_t> pool = combined_pools(config);
    const std::span<const std::uint32_t> sources(pool.data(), config.n_sources);
    const std::span<const std::uint32_t> destinations(pool.data() + config.n_sources,
                                                      config.n_destinations);

    const ZipfSampler source_sampler(config.n_sources, config.source_exponent);
    const ZipfSampler destination_sampler(config.n_destinations, config.destination_exponent);

    SplitMix64 rng(config.seed);
    std::vector<IpPair> pairs;
    pairs.reserve(config.n_packets);
    for (std::uint64_t i = 0; i < config.n_packets; ++i) {
        const std::uint64_t s = source_sampler.sample(rng.next());
        const std::uint64_t d = destination_sampler.sample(rng.next());
        pairs.push_back(IpPair{sources[s], destinations[d]});
    }
    return pairs;
}

void write_pcap(std::span<const IpPair> pairs, const SynthConfig& config, std::ostream& out,
                std::uint64_t pair_offset) {
    if (config.noise_fraction < 0.0 || config.noise_fraction > 1.0) {
        throw std::invalid_argument("noise fraction must be in [0, 1]");
    }
    PcapWriter writer(out, config.link_type);

    SplitMix64 noise_rng(config.seed ^ kNoiseStream ^ pair_offset);
    const auto noise_threshold = static_cast<std::uint64_t>(
        config.noise_fraction * 18446744073709551615.0);
    const std::vector<std::uint8_t> noise = noise_frame(config);

    std::uint64_t micros = pair_offset * config.inter_packet_micros;
    const auto emit_time = [&](std::vector<std::uint8_t> const& frame) {
        const auto ts_sec =
            static_cast<std::uint32_t>(config.timestamp_start + micros / 1'000'000);
        const auto ts_usec = static_cast<std::uint32_t>(micros % 1'000'000);
        writer.write_record(ts_sec, ts_usec, frame);
        micros += config.inter_packet_micros;
    };

    std::vector<std::uint8_t> frame;
    for (const IpPair& p : pairs) {
        if (config.noise_fraction > 0.0 && noise_rng.next() < noise_threshold) {
            emit_time(noise);
        }
        frame.clear();
        if (config.link_type == kLinkTypeEthernet) {
            append_ethernet_header(frame, 0x0800);
        }
        append_ipv4_header(frame, p.src, p.dst);
        emit_time(frame);
    }
}

void write_pcap_file(std::span<const IpPair> pairs, const SynthConfig& config,
                     const std::filesystem::path& path, std::uint64_t pair_offset) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot create " + path.string());
    }
    write_pcap(pairs, config, out, pair_offset);
    out.close();
    if (out.fail()) {
        throw std::runtime_error("write failed on " + path.string());
    }
}

}  // namespace netsense
