#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "netsense/anonymizer.hpp"
#include "netsense/ip_pair.hpp"

namespace testutil {

// Byte-level capture builder so tests control every field, including the
// big-endian variants the production writer never emits.
class PcapBuilder {
public:
    explicit PcapBuilder(bool big_endian = false, bool nanosecond = false,
                         std::uint32_t link_type = 1, std::uint32_t snaplen = 65535)
        : big_(big_endian) {
        const std::uint32_t magic = nanosecond ? 0xa1b23c4du : 0xa1b2c3d4u;
        put32(magic);
        put16(2);
        put16(4);
        put32(0);
        put32(0);
        put32(snaplen);
        put32(link_type);
    }

    PcapBuilder& record(const std::vector<std::uint8_t>& payload, std::uint32_t ts_sec = 0,
                        std::uint32_t ts_frac = 0) {
        return record_with_lengths(payload, static_cast<std::uint32_t>(payload.size()),
                                   static_cast<std::uint32_t>(payload.size()), ts_sec, ts_frac);
    }

    PcapBuilder& record_with_lengths(const std::vector<std::uint8_t>& payload,
                                     std::uint32_t incl_len, std::uint32_t orig_len,
                                     std::uint32_t ts_sec = 0, std::uint32_t ts_frac = 0) {
        put32(ts_sec);
        put32(ts_frac);
        put32(incl_len);
        put32(orig_len);
        bytes.insert(bytes.end(), payload.begin(), payload.end());
        return *this;
    }

    PcapBuilder& raw(const std::vector<std::uint8_t>& extra) {
        bytes.insert(bytes.end(), extra.begin(), extra.end());
        return *this;
    }

    std::string str() const { return {bytes.begin(), bytes.end()}; }

    std::vector<std::uint8_t> bytes;

private:
    void put16(std::uint16_t v) {
        if (big_) {
            bytes.push_back(static_cast<std::uint8_t>(v >> 8));
            bytes.push_back(static_cast<std::uint8_t>(v));
        } else {
            bytes.push_back(static_cast<std::uint8_t>(v));
            bytes.push_back(static_cast<std::uint8_t>(v >> 8));
        }
    }
    void put32(std::uint32_t v) {
        if (big_) {
            for (int s = 24; s >= 0; s -= 8) bytes.push_back(static_cast<std::uint8_t>(v >> s));
        } else {
            for (int s = 0; s <= 24; s += 8) bytes.push_back(static_cast<std::uint8_t>(v >> s));
        }
    }

    bool big_;
};

// Minimal frames for extraction tests.
inline std::vector<std::uint8_t> ipv4_header(std::uint32_t src, std::uint32_t dst) {
    std::vector<std::uint8_t> h(20, 0);
    h[0] = 0x45;
    h[2] = 0;
    h[3] = 20;
    h[8] = 64;
    h[9] = 253;
    for (int i = 0; i < 4; ++i) {
        h[12 + i] = static_cast<std::uint8_t>(src >> (24 - 8 * i));
        h[16 + i] = static_cast<std::uint8_t>(dst >> (24 - 8 * i));
    }
    return h;
}

inline std::vector<std::uint8_t> eth_frame(std::uint16_t ether_type,
                                           const std::vector<std::uint8_t>& body,
                                           const std::vector<std::uint16_t>& vlan_tpids = {}) {
    std::vector<std::uint8_t> f(12, 0x02);
    for (std::uint16_t tpid : vlan_tpids) {
        f.push_back(static_cast<std::uint8_t>(tpid >> 8));
        f.push_back(static_cast<std::uint8_t>(tpid));
        f.push_back(0);
        f.push_back(1);
    }
    f.push_back(static_cast<std::uint8_t>(ether_type >> 8));
    f.push_back(static_cast<std::uint8_t>(ether_type));
    f.insert(f.end(), body.begin(), body.end());
    return f;
}

inline netsense::AnonKey test_key(std::uint8_t fill = 0x42) {
    std::vector<std::uint8_t> bytes(32);
    for (std::size_t i = 0; i < 32; ++i) {
        bytes[i] = static_cast<std::uint8_t>(fill + i);
    }
    return netsense::AnonKey::from_bytes(bytes);
}

// Pairs drawn from a fixed engine; for oracle-style checks only.
inline std::vector<netsense::IpPair> random_pairs(std::size_t n, std::uint32_t seed,
                                                  std::uint32_t src_space = 64,
                                                  std::uint32_t dst_space = 64) {
    std::mt19937 gen(seed);
    std::vector<netsense::IpPair> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        pairs.push_back(netsense::IpPair{gen() % src_space, 0x80000000u + gen() % dst_space});
    }
    return pairs;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("netsense_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace testutil
