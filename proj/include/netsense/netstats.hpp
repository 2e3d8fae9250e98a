#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netsense/anonymizer.hpp"
#include "netsense/traffic_matrix.hpp"

namespace netsense {

// Network-theoretic statistics of a traffic matrix. Rows are sources,
// columns destinations; "fan-out"/"fan-in" count distinct peers, the
// "packets" fields count total mass.
struct NetStats {
    std::uint64_t valid_packets = 0;
    std::uint64_t unique_links = 0;
    std::uint64_t unique_sources = 0;
    std::uint64_t unique_destinations = 0;
    std::uint64_t max_link_packets = 0;
    std::uint64_t max_source_packets = 0;
    std::uint64_t max_source_fanout = 0;
    std::uint64_t max_destination_packets = 0;
    std::uint64_t max_destination_fanin = 0;
    std::uint64_t links_with_one_packet = 0;
    std::uint64_t sources_with_one_packet = 0;
    std::uint64_t destinations_with_one_packet = 0;
    std::uint64_t sources_with_fanout_one = 0;
    std::uint64_t destinations_with_fanin_one = 0;

    bool operator==(const NetStats&) const = default;
};

// Stable field table driving JSON, table and diff output.
struct NetStatsField {
    const char* name;
    std::uint64_t NetStats::* member;
};
std::span<const NetStatsField> net_stats_fields();

// One row-ordered pass plus one column-grouped pass over the sorted
// entries. The parallel variant partitions at row (resp. column)
// boundaries and merges partials; results equal the serial reference for
// any worker count.
NetStats compute_stats(const TrafficMatrix& m);
NetStats compute_stats_serial(const TrafficMatrix& m);

// Brute-force tally straight from a pair list; shares no code with
// compute_stats and exists to check it.
NetStats oracle_stats(std::span<const AnonymizedPair> pairs);

struct ReportMeta {
    std::optional<std::uint64_t> window_size;
    std::uint64_t matrix_count = 0;
    std::optional<std::string> key_fingerprint;
};

// Deterministic JSON report: the 14 fields in declaration order plus a
// "meta" sub-object.
std::string stats_to_json(const NetStats& stats, const ReportMeta& meta);

// Aligned human-readable rendering.
std::string stats_table(const NetStats& stats);

struct FieldDiff {
    std::string field;
    std::uint64_t lhs = 0;
    std::uint64_t rhs = 0;
};
std::vector<FieldDiff> diff_stats(const NetStats& lhs, const NetStats& rhs);

}  // namespace netsense
