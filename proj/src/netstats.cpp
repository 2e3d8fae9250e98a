#include "netsense/netstats.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <sstream>

#include <json.hpp>

namespace netsense {

namespace {

constexpr std::array<NetStatsField, 14> kFields{{
    {"valid_packets", &NetStats::valid_packets},
    {"unique_links", &NetStats::unique_links},
    {"unique_sources", &NetStats::unique_sources},
    {"unique_destinations", &NetStats::unique_destinations},
    {"max_link_packets", &NetStats::max_link_packets},
    {"max_source_packets", &NetStats::max_source_packets},
    {"max_source_fanout", &NetStats::max_source_fanout},
    {"max_destination_packets", &NetStats::max_destination_packets},
    {"max_destination_fanin", &NetStats::max_destination_fanin},
    {"links_with_one_packet", &NetStats::links_with_one_packet},
    {"sources_with_one_packet", &NetStats::sources_with_one_packet},
    {"destinations_with_one_packet", &NetStats::destinations_with_one_packet},
    {"sources_with_fanout_one", &NetStats::sources_with_fanout_one},
    {"destinations_with_fanin_one", &NetStats::destinations_with_fanin_one},
}};

// Row-major pass: per-entry fields plus everything grouped by source.
// The span must begin and end on row boundaries.
struct RowPartial {
    std::uint64_t valid_packets = 0;
    std::uint64_t unique_links = 0;
    std::uint64_t max_link_packets = 0;
    std::uint64_t links_with_one_packet = 0;
    std::uint64_t unique_sources = 0;
    std::uint64_t max_source_packets = 0;
    std::uint64_t max_source_fanout = 0;
    std::uint64_t sources_with_one_packet = 0;
    std::uint64_t sources_with_fanout_one = 0;
};

RowPartial row_pass(std::span<const Entry> entries) {
    RowPartial r;
    std::size_t i = 0;
    while (i < entries.size()) {
        const std::uint32_t row = entries[i].row;
        std::uint64_t row_packets = 0;
        std::uint64_t row_fanout = 0;
        for (; i < entries.size() && entries[i].row == row; ++i) {
            const std::uint64_t c = entries[i].count;
            r.valid_packets += c;
            r.unique_links++;
            r.max_link_packets = std::max(r.max_link_packets, c);
            if (c == 1) r.links_with_one_packet++;
            row_packets += c;
            row_fanout++;
        }
        r.unique_sources++;
        r.max_source_packets = std::max(r.max_source_packets, row_packets);
        r.max_source_fanout = std::max(r.max_source_fanout, row_fanout);
        if (row_packets == 1) r.sources_with_one_packet++;
        if (row_fanout == 1) r.sources_with_fanout_one++;
    }
    return r;
}

void merge_row(RowPartial& into, const RowPartial& from) {
    into.valid_packets += from.valid_packets;
    into.unique_links += from.unique_links;
    into.max_link_packets = std::max(into.max_link_packets, from.max_link_packets);
    into.links_with_one_packet += from.links_with_one_packet;
    into.unique_sources += from.unique_sources;
    into.max_source_packets = std::max(into.max_source_packets, from.max_source_packets);
    into.max_source_fanout = std::max(into.max_source_fanout, from.max_source_fanout);
    into.sources_with_one_packet += from.sources_with_one_packet;
    into.sources_with_fanout_one += from.sources_with_fanout_one;
}

// Column pass over (col, count) cells grouped by column.
struct ColPartial {
    std::uint64_t unique_destinations = 0;
    std::uint64_t max_destination_packets = 0;
    std::uint64_t max_destination_fanin = 0;
    std::uint64_t destinations_with_one_packet = 0;
    std::uint64_t destinations_with_fanin_one = 0;
};

using ColCell = std::pair<std::uint32_t, std::uint64_t>;

ColPartial col_pass(std::span<const ColCell> cells) {
    ColPartial r;
    std::size_t i = 0;
    while (i < cells.size()) {
        const std::uint32_t col = cells[i].first;
        std::uint64_t col_packets = 0;
        std::uint64_t col_fanin = 0;
        for (; i < cells.size() && cells[i].first == col; ++i) {
            col_packets += cells[i].second;
            col_fanin++;
        }
        r.unique_destinations++;
        r.max_destination_packets = std::max(r.max_destination_packets, col_packets);
        r.max_destination_fanin = std::max(r.max_destination_fanin, col_fanin);
        if (col_packets == 1) r.destinations_with_one_packet++;
        if (col_fanin == 1) r.destinations_with_fanin_one++;
    }
    return r;
}

void merge_col(ColPartial& into, const ColPartial& from) {
    into.unique_destinations += from.unique_destinations;
    into.max_destination_packets = std::max(into.max_destination_packets,
                                            from.max_destination_packets);
    into.max_destination_fanin = std::max(into.max_destination_fanin, from.max_destination_fanin);
    into.destinations_with_one_packet += from.destinations_with_one_packet;
    into.destinations_with_fanin_one += from.destinations_with_fanin_one;
}

NetStats assemble(const RowPartial& r, const ColPartial& c) {
    NetStats s;
    s.valid_packets = r.valid_packets;
    s.unique_links = r.unique_links;
    s.unique_sources = r.unique_sources;
    s.unique_destinations = c.unique_destinations;
    s.max_link_packets = r.max_link_packets;
    s.max_source_packets = r.max_source_packets;
    s.max_source_fanout = r.max_source_fanout;
    s.max_destination_packets = c.max_destination_packets;
    s.max_destination_fanin = c.max_destination_fanin;
    s.links_with_one_packet = r.links_with_one_packet;
    s.sources_with_one_packet = r.sources_with_one_packet;
    s.destinations_with_one_packet = c.destinations_with_one_packet;
    s.sources_with_fanout_one = r.sources_with_fanout_one;
    s.destinations_with_fanin_one = c.destinations_with_fanin_one;
    return s;
}

std::vector<ColCell> column_cells(std::span<const Entry> entries) {
    std::vector<ColCell> cells;
    cells.reserve(entries.size());
    for (const Entry& e : entries) {
        cells.emplace_back(e.col, e.count);
    }
    std::sort(cells.begin(), cells.end(),
              [](const ColCell& a, const ColCell& b) { return a.first < b.first; });
    return cells;
}

}  // namespace

std::span<const NetStatsField> net_stats_fields() { return kFields; }

NetStats compute_stats_serial(const TrafficMatrix& m) {
    const RowPartial r = row_pass(m.entries());
    const std::vector<ColCell> cells = column_cells(m.entries());
    const ColPartial c = col_pass(cells);
    return assemble(r, c);
}

NetStats compute_stats(const TrafficMatrix& m) {
    const std::span<const Entry> entries = m.entries();
    const std::size_t n = entries.size();
    const std::size_t n_chunks = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));

    // Chunk boundaries aligned so no source row straddles two chunks.
    std::vector<std::size_t> row_bounds(n_chunks + 1, n);
    row_bounds[0] = 0;
    for (std::size_t c = 1; c < n_chunks; ++c) {
        std::size_t b = n * c / n_chunks;
        while (b < n && b > 0 && entries[b].row == entries[b - 1].row) {
            ++b;
        }
        row_bounds[c] = std::max(b, row_bounds[c - 1]);
    }

    std::vector<RowPartial> row_parts(n_chunks);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        const std::size_t lo = row_bounds[static_cast<std::size_t>(c)];
        const std::size_t hi = row_bounds[static_cast<std::size_t>(c) + 1];
        row_parts[static_cast<std::size_t>(c)] = row_pass(entries.subspan(lo, hi - lo));
    }
    RowPartial r;
    for (const RowPartial& part : row_parts) {
        merge_row(r, part);
    }

    const std::vector<ColCell> cells = column_cells(entries);
    std::vector<std::size_t> col_bounds(n_chunks + 1, n);
    col_bounds[0] = 0;
    for (std::size_t c = 1; c < n_chunks; ++c) {
        std::size_t b = n * c / n_chunks;
        while (b < n && b > 0 && cells[b].first == cells[b - 1].first) {
            ++b;
        }
        col_bounds[c] = std::max(b, col_bounds[c - 1]);
    }

    std::vector<ColPartial> col_parts(n_chunks);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        const std::size_t lo = col_bounds[static_cast<std::size_t>(c)];
        const std::size_t hi = col_bounds[static_cast<std::size_t>(c) + 1];
        col_parts[static_cast<std::size_t>(c)] =
            col_pass(std::span<const ColCell>(cells).subspan(lo, hi - lo));
    }
    ColPartial col;
    for (const ColPartial& part : col_parts) {
        merge_col(col, part);
    }

    return assemble(r, col);
}

std::string stats_to_json(const NetStats& stats, const ReportMeta& meta) {
    nlohmann::ordered_json j;
    for (const NetStatsField& f : kFields) {
        j[f.name] = stats.*(f.member);
    }
    nlohmann::ordered_json m;
    if (meta.window_size) {
        m["window_size"] = *meta.window_size;
    } else {
        m["window_size"] = nullptr;
    }
    m["matrix_count"] = meta.matrix_count;
    if (meta.key_fingerprint) {
        m["key_fingerprint"] = *meta.key_fingerprint;
    } else {
        m["key_fingerprint"] = nullptr;
    }
    j["meta"] = std::move(m);
    return j.dump(2) + "\n";
}

std::string stats_table(const NetStats& stats) {
    std::size_t width = 0;
    for (const NetStatsField& f : kFields) {
        width = std::max(width, std::string_view(f.name).size());
    }
    std::ostringstream out;
    for (const NetStatsField& f : kFields) {
        out << f.name;
        for (std::size_t i = std::string_view(f.name).size(); i < width + 2; ++i) {
            out << ' ';
        }
        out << stats.*(f.member) << '\n';
    }
    return out.str();
}

std::vector<FieldDiff> diff_stats(const NetStats& lhs, const NetStats& rhs) {
    std::vector<FieldDiff> diffs;
    for (const NetStatsField& f : kFields) {
        if (lhs.*(f.member) != rhs.*(f.member)) {
            diffs.push_back(FieldDiff{f.name, lhs.*(f.member), rhs.*(f.member)});
        }
    }
    return diffs;
}

}  // namespace netsense
