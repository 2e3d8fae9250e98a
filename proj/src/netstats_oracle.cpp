#include <cstdint>
#include <span>
#include <unordered_map>

#include "netsense/netstats.hpp"

namespace netsense {

// Direct tally over the pair list. Deliberately written against its own
// maps, not against TrafficMatrix or any code in netstats.cpp, so the two
// paths can check each other.
NetStats oracle_stats(std::span<const AnonymizedPair> pairs) {
    std::unordered_map<std::uint64_t, std::uint64_t> link_packets;
    std::unordered_map<std::uint32_t, std::uint64_t> source_packets;
    std::unordered_map<std::uint32_t, std::uint64_t> destination_packets;

    for (const AnonymizedPair& p : pairs) {
        const std::uint64_t link = (static_cast<std::uint64_t>(p.src()) << 32) | p.dst();
        link_packets[link]++;
        source_packets[p.src()]++;
        destination_packets[p.dst()]++;
    }

    std::unordered_map<std::uint32_t, std::uint64_t> source_fanout;
    std::unordered_map<std::uint32_t, std::uint64_t> destination_fanin;
    for (const auto& [link, count] : link_packets) {
        source_fanout[static_cast<std::uint32_t>(link >> 32)]++;
        destination_fanin[static_cast<std::uint32_t>(link)]++;
    }

    NetStats s;
    for (const auto& [link, count] : link_packets) {
        s.valid_packets += count;
        s.unique_links++;
        if (count > s.max_link_packets) s.max_link_packets = count;
        if (count == 1) s.links_with_one_packet++;
    }
    for (const auto& [src, count] : source_packets) {
        s.unique_sources++;
        if (count > s.max_source_packets) s.max_source_packets = count;
        if (count == 1) s.sources_with_one_packet++;
    }
    for (const auto& [dst, count] : destination_packets) {
        s.unique_destinations++;
        if (count > s.max_destination_packets) s.max_destination_packets = count;
        if (count == 1) s.destinations_with_one_packet++;
    }
    for (const auto& [src, fanout] : source_fanout) {
        if (fanout > s.max_source_fanout) s.max_source_fanout = fanout;
        if (fanout == 1) s.sources_with_fanout_one++;
    }
    for (const auto& [dst, fanin] : destination_fanin) {
        if (fanin > s.max_destination_fanin) s.max_destination_fanin = fanin;
        if (fanin == 1) s.destinations_with_fanin_one++;
    }
    return s;
}

}  // namespace netsense
