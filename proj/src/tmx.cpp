#include "netsense/tmx.hpp"

#include <cinttypes>
#include <cstdio>

#include "netsense/bytes.hpp"

namespace netsense::tmx {

namespace {
constexpr std::uint8_t kMagic[4] = {'T', 'M', 'X', '1'};
}

std::vector<std::uint8_t> write_matrix(const TrafficMatrix& m) {
    std::vector<std::uint8_t> out(kHeaderSize + kTripleSize * m.entries().size());
    std::uint8_t* p = out.data();

    p[0] = kMagic[0];
    p[1] = kMagic[1];
    p[2] = kMagic[2];
    p[3] = kMagic[3];
    store_le32(p + 4, kVersion);
    store_le32(p + 8, 0);   // flags
    store_le32(p + 12, 0);  // reserved
    store_le64(p + 16, m.window_index());
    store_le64(p + 24, m.nnz());

    p += kHeaderSize;
    for (const Entry& e : m.entries()) {
        store_le32(p, e.row);
        store_le32(p + 4, e.col);
        store_le64(p + 8, e.count);
        p += kTripleSize;
    }
    return out;
}

TrafficMatrix read_matrix(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) {
        throw Malformed("shorter than the 32-byte header");
    }
    const std::uint8_t* p = bytes.data();
    if (p[0] != kMagic[0] || p[1] != kMagic[1] || p[2] != kMagic[2] || p[3] != kMagic[3]) {
        throw BadMagic("bad magic");
    }
    const std::uint32_t version = load_le32(p + 4);
    if (version != kVersion) {
        throw UnsupportedVersion("unsupported version " + std::to_string(version));
    }
    if (load_le32(p + 8) != 0 || load_le32(p + 12) != 0) {
        throw Malformed("nonzero flags/reserved field");
    }
    const std::uint64_t window_index = load_le64(p + 16);
    const std::uint64_t nnz = load_le64(p + 24);

    if (nnz > (bytes.size() - kHeaderSize) / kTripleSize) {
        throw Malformed("truncated: nnz exceeds available triples");
    }
    if (bytes.size() != kHeaderSize + nnz * kTripleSize) {
        throw Malformed("trailing bytes after the last triple");
    }

    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    p += kHeaderSize;
    std::uint64_t prev_key = 0;
    for (std::uint64_t i = 0; i < nnz; ++i, p += kTripleSize) {
        Entry e{load_le32(p), load_le32(p + 4), load_le64(p + 8)};
        const std::uint64_t key = (static_cast<std::uint64_t>(e.row) << 32) | e.col;
        if (i > 0 && key <= prev_key) {
            throw Malformed("entries not strictly sorted by (row, col)");
        }
        if (e.count == 0) {
            throw Malformed("zero count");
        }
        prev_key = key;
        entries.push_back(e);
    }
    return TrafficMatrix::from_entries(window_index, std::move(entries));
}

std::string member_name(std::uint64_t window_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "tm_%08" PRIu64 ".tmx", window_index);
    return buf;
}

}  // namespace netsense::tmx
