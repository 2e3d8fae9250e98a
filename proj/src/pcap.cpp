#include "netsense/pcap.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "netsense/bytes.hpp"

namespace netsense {

namespace {

constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;

constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;
constexpr std::uint16_t kEtherTypeQinQ = 0x88a8;
constexpr std::size_t kEthernetHeaderSize = 14;
constexpr std::size_t kVlanTagSize = 4;
constexpr std::size_t kIpv4HeaderMin = 20;

bool read_exact(std::istream& in, std::uint8_t* buf, std::size_t n) {
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

std::uint32_t load32(const std::uint8_t* p, Endianness e) {
    return e == Endianness::little ? load_le32(p) : load_be32(p);
}

std::uint16_t load16(const std::uint8_t* p, Endianness e) {
    return e == Endianness::little ? load_le16(p) : load_be16(p);
}

bool link_type_supported(std::uint32_t lt) {
    return lt == kLinkTypeEthernet || lt == kLinkTypeRawIp;
}

}  // namespace

CaptureReader::CaptureReader(std::istream& in) : in_(&in) {
    std::uint8_t hdr[kGlobalHeaderSize];
    if (!read_exact(in, hdr, kGlobalHeaderSize)) {
        throw TruncatedHeader("capture shorter than the 24-byte global header");
    }

    // The magic number fixes both byte order and timestamp resolution.
    const std::uint32_t magic_be = load_be32(hdr);
    switch (magic_be) {
        case 0xa1b2c3d4u:
            header_.endianness = Endianness::big;
            header_.resolution = TimeResolution::microsecond;
            break;
        case 0xd4c3b2a1u:
            header_.endianness = Endianness::little;
            header_.resolution = TimeResolution::microsecond;
            break;
        case 0xa1b23c4du:
            header_.endianness = Endianness::big;
            header_.resolution = TimeResolution::nanosecond;
            break;
        case 0x4d3cb2a1u:
            header_.endianness = Endianness::little;
            header_.resolution = TimeResolution::nanosecond;
            break;
        default:
            throw UnknownMagic("not a classic pcap file (unrecognized magic number)");
    }

    const Endianness e = header_.endianness;
    header_.version_major = load16(hdr + 4, e);
    header_.version_minor = load16(hdr + 6, e);
    // thiszone (8..11) and sigfigs (12..15) are ignored.
    header_.snap_length = load32(hdr + 16, e);
    header_.link_type = load32(hdr + 20, e);

    if (header_.snap_length == 0) {
        throw TruncatedHeader("snap length of zero");
    }
    if (!link_type_supported(header_.link_type)) {
        throw UnsupportedLinkType("unsupported link type " + std::to_string(header_.link_type));
    }

    ts_fraction_limit_ =
        header_.resolution == TimeResolution::microsecond ? 1'000'000u : 1'000'000'000u;
}

bool CaptureReader::next(PacketRecord& out) {
    if (done_) {
        return false;
    }

    std::uint8_t hdr[kRecordHeaderSize];
    in_->read(reinterpret_cast<char*>(hdr), kRecordHeaderSize);
    const auto got = static_cast<std::size_t>(in_->gcount());
    if (got == 0) {
        done_ = true;
        return false;
    }
    if (got < kRecordHeaderSize) {
        // A record started but its header is incomplete: corrupt tail.
        done_ = true;
        truncated_tail_ = true;
        return false;
    }

    const Endianness e = header_.endianness;
    out.ts_seconds = load32(hdr, e);
    out.ts_fraction = load32(hdr + 4, e);
    out.captured_length = load32(hdr + 8, e);
    out.original_length = load32(hdr + 12, e);

    if (out.captured_length > header_.snap_length || out.captured_length > out.original_length ||
        out.ts_fraction >= ts_fraction_limit_) {
        done_ = true;
        truncated_tail_ = true;
        return false;
    }

    out.payload.resize(out.captured_length);
    if (!read_exact(*in_, out.payload.data(), out.captured_length)) {
        done_ = true;
        truncated_tail_ = true;
        return false;
    }
    return true;
}

Extraction extract_ip_pair(std::span<const std::uint8_t> payload, std::uint32_t link_type) {
    std::size_t ip_off = 0;

    if (link_type == kLinkTypeEthernet) {
        if (payload.size() < kEthernetHeaderSize) {
            return {ExtractStatus::truncated, {}};
        }
        std::size_t type_off = kEthernetHeaderSize - 2;
        std::uint16_t ether_type = load_be16(payload.data() + type_off);
        while (ether_type == kEtherTypeVlan || ether_type == kEtherTypeQinQ) {
            type_off += kVlanTagSize;
            if (type_off + 2 > payload.size()) {
                return {ExtractStatus::truncated, {}};
            }
            ether_type = load_be16(payload.data() + type_off);
        }
        if (ether_type != kEtherTypeIpv4) {
            return {ExtractStatus::not_ipv4, {}};
        }
        ip_off = type_off + 2;
    } else if (link_type == kLinkTypeRawIp) {
        if (payload.empty()) {
            return {ExtractStatus::truncated, {}};
        }
        if ((payload[0] >> 4) != 4) {
            return {ExtractStatus::not_ipv4, {}};
        }
    } else {
        return {ExtractStatus::not_ipv4, {}};
    }

    if (ip_off + kIpv4HeaderMin > payload.size()) {
        return {ExtractStatus::truncated, {}};
    }

    // Source and destination sit at fixed offsets 12..19 regardless of IHL.
    IpPair pair{load_be32(payload.data() + ip_off + 12), load_be32(payload.data() + ip_off + 16)};
    return {ExtractStatus::ipv4, pair};
}

void ingest_capture(std::istream& in, IngestReport& report, const PairSink& sink) {
    CaptureReader reader(in);
    PacketRecord record;
    while (reader.next(record)) {
        report.packets_read++;
        const Extraction ex = extract_ip_pair(record.payload, reader.header().link_type);
        switch (ex.status) {
            case ExtractStatus::ipv4:
                report.pairs_extracted++;
                sink(ex.pair);
                break;
            case ExtractStatus::not_ipv4:
                report.skipped_non_ipv4++;
                break;
            case ExtractStatus::truncated:
                report.skipped_truncated++;
                break;
        }
    }
    if (reader.truncated_tail()) {
        // Count the aborted record so the totals stay conserved.
        report.packets_read++;
        report.skipped_truncated++;
    }
}

IngestReport ingest_files(const std::vector<std::filesystem::path>& paths, const PairSink& sink,
                          const WarnSink& warn) {
    if (paths.empty()) {
        throw IngestError("no input files given");
    }

    IngestReport report;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            if (warn) warn("cannot open " + path.string() + ", skipping");
            continue;
        }
        try {
            ingest_capture(in, report, sink);
        } catch (const PcapError& e) {
            if (warn) warn(path.string() + ": " + e.what() + ", skipping");
            continue;
        }
        report.files_processed++;
    }

    if (report.files_processed == 0) {
        throw IngestError("none of the input files could be read");
    }
    return report;
}

PcapWriter::PcapWriter(std::ostream& out, std::uint32_t link_type, std::uint32_t snap_length)
    : out_(&out) {
    std::uint8_t hdr[kGlobalHeaderSize] = {};
    store_le32(hdr, 0xa1b2c3d4u);
    store_le16(hdr + 4, 2);
    store_le16(hdr + 6, 4);
    store_le32(hdr + 16, snap_length);
    store_le32(hdr + 20, link_type);
    out_->write(reinterpret_cast<const char*>(hdr), kGlobalHeaderSize);
}

void PcapWriter::write_record(std::uint32_t ts_sec, std::uint32_t ts_usec,
                              std::span<const std::uint8_t> payload) {
    std::uint8_t hdr[kRecordHeaderSize];
    store_le32(hdr, ts_sec);
    store_le32(hdr + 4, ts_usec);
    store_le32(hdr + 8, static_cast<std::uint32_t>(payload.size()));
    store_le32(hdr + 12, static_cast<std::uint32_t>(payload.size()));
    out_->write(reinterpret_cast<const char*>(hdr), kRecordHeaderSize);
    out_->write(reinterpret_cast<const char*>(payload.data()),
                static_cast<std::streamsize>(payload.size()));
}

}  // namespace netsense
