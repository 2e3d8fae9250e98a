#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsense/ip_pair.hpp"

namespace netsense {

constexpr std::uint32_t kLinkTypeEthernet = 1;
constexpr std::uint32_t kLinkTypeRawIp = 101;

enum class Endianness { little, big };
enum class TimeResolution { microsecond, nanosecond };

struct CaptureHeader {
    Endianness endianness = Endianness::little;
    TimeResolution resolution = TimeResolution::microsecond;
    std::uint16_t version_major = 0;
    std::uint16_t version_minor = 0;
    std::uint32_t snap_length = 0;
    std::uint32_t link_type = 0;
};

struct PacketRecord {
    std::uint32_t ts_seconds = 0;
    std::uint32_t ts_fraction = 0;
    std::uint32_t captured_length = 0;
    std::uint32_t original_length = 0;
    std::vector<std::uint8_t> payload;
};

struct PcapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownMagic : PcapError {
    using PcapError::PcapError;
};
struct TruncatedHeader : PcapError {
    using PcapError::PcapError;
};
struct UnsupportedLinkType : PcapError {
    using PcapError::PcapError;
};
struct IngestError : PcapError {
    using PcapError::PcapError;
};

// Streaming reader over a classic pcap byte stream. The constructor consumes
// and validates the 24-byte global header; next() then yields records until
// end of stream. Memory use is bounded by snap_length.
class CaptureReader {
public:
    explicit CaptureReader(std::istream& in);

    const CaptureHeader& header() const { return header_; }

    // Fills `out` with the next record, reusing its payload storage.
    // Returns false at end of stream. A corrupt trailing record (truncated
    // mid-record, captured_length above snap_length or original_length, or
    // an out-of-range timestamp fraction) ends the stream gracefully and is
    // reported through truncated_tail(); records already returned stay valid.
    bool next(PacketRecord& out);

    bool truncated_tail() const { return truncated_tail_; }

private:
    std::istream* in_;
    CaptureHeader header_;
    std::uint32_t ts_fraction_limit_ = 0;
    bool done_ = false;
    bool truncated_tail_ = false;
};

enum class ExtractStatus { ipv4, not_ipv4, truncated };

struct Extraction {
    ExtractStatus status = ExtractStatus::truncated;
    IpPair pair;
};

// Pulls the IPv4 source/destination addresses out of one captured frame.
// Ethernet frames may carry any number of stacked 802.1Q / 802.1ad tags.
Extraction extract_ip_pair(std::span<const std::uint8_t> payload, std::uint32_t link_type);

struct IngestReport {
    std::uint64_t packets_read = 0;
    std::uint64_t pairs_extracted = 0;
    std::uint64_t skipped_non_ipv4 = 0;
    std::uint64_t skipped_truncated = 0;
    std::uint64_t files_processed = 0;

    bool operator==(const IngestReport&) const = default;
};

using PairSink = std::function<void(IpPair)>;
using WarnSink = std::function<void(const std::string&)>;

// Runs one opened capture stream through extraction, feeding every IPv4 pair
// to the sink and accumulating counters (files_processed is untouched).
void ingest_capture(std::istream& in, IngestReport& report, const PairSink& sink);

// Processes files in order, packets in order within each file; this
// concatenated order is the global sequence later used for windowing.
// Unreadable or unparseable files are reported to `warn` and skipped; it is
// an error if no file can be opened (or if `paths` is empty).
IngestReport ingest_files(const std::vector<std::filesystem::path>& paths, const PairSink& sink,
                          const WarnSink& warn = {});

// Classic pcap writer, little-endian microsecond variant.
class PcapWriter {
public:
    PcapWriter(std::ostream& out, std::uint32_t link_type, std::uint32_t snap_length = 65535);

    void write_record(std::uint32_t ts_sec, std::uint32_t ts_usec,
                      std::span<const std::uint8_t> payload);

private:
    std::ostream* out_;
};

}  // namespace netsense
