#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netsense/ip_pair.hpp"

namespace netsense {

struct KeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KeyLengthError : KeyError {
    using KeyError::KeyError;
};
struct KeyFormatError : KeyError {
    using KeyError::KeyError;
};

// 32 bytes of key material: an AES-128 key plus the seed of the secret pad.
struct AnonKey {
    std::array<std::uint8_t, 16> cipher_key{};
    std::array<std::uint8_t, 16> pad_seed{};

    static AnonKey from_bytes(std::span<const std::uint8_t> bytes);
    // 64 hex characters; surrounding whitespace tolerated. The only accepted
    // key encoding: raw-byte files are ambiguous and rejected by design.
    static AnonKey from_hex(std::string_view hex);
    static AnonKey from_file(const std::filesystem::path& path);
};

// First 8 hex characters of SHA-256 over the 32 decoded key bytes. Safe to
// print; the key itself never is.
std::string key_fingerprint(const AnonKey& key);

// A (source, destination) pair that has passed through the anonymizer.
// Only the anonymizer can mint one, which keeps raw addresses out of the
// matrix-construction API by type.
class AnonymizedPair {
public:
    std::uint32_t src() const { return src_; }
    std::uint32_t dst() const { return dst_; }

    bool operator==(const AnonymizedPair&) const = default;

private:
    friend class Anonymizer;
    friend class CachingAnonymizer;
    AnonymizedPair(std::uint32_t src, std::uint32_t dst) : src_(src), dst_(dst) {}

    std::uint32_t src_;
    std::uint32_t dst_;
};

// Prefix-preserving keyed bijection on 32-bit addresses (the Crypto-PAn
// construction). Bit i of the output is bit i of the input XORed with the
// most significant bit of AES(prefix block i), where prefix block i carries
// the input's top i bits over the secret pad. Immutable after derivation and
// safe for concurrent use from any number of threads.
class Anonymizer {
public:
    static Anonymizer derive(const AnonKey& key);

    std::uint32_t anonymize_ip(std::uint32_t addr) const;
    AnonymizedPair anonymize_pair(IpPair p) const;

    // Bulk mapping; OpenMP-parallel with one cipher session per thread.
    void anonymize_addrs(std::span<const std::uint32_t> in, std::span<std::uint32_t> out) const;
    // Single-threaded reference for the kernel above.
    void anonymize_addrs_serial(std::span<const std::uint32_t> in,
                                std::span<std::uint32_t> out) const;

    std::vector<AnonymizedPair> anonymize_pairs(std::span<const IpPair> pairs) const;

private:
    Anonymizer() = default;

    std::array<std::uint8_t, 16> cipher_key_{};
    std::array<std::uint8_t, 16> pad_block_{};
};

// Memoizing front end for workloads with heavy address reuse. Outputs are
// identical with and without it; only throughput changes. Not thread-safe:
// one instance per owning stage.
class CachingAnonymizer {
public:
    explicit CachingAnonymizer(const Anonymizer& anonymizer) : anon_(&anonymizer) {}

    std::vector<AnonymizedPair> anonymize_pairs(std::span<const IpPair> pairs);

    std::size_t cache_size() const { return cache_.size(); }

private:
    const Anonymizer* anon_;
    std::unordered_map<std::uint32_t, std::uint32_t> cache_;
};

}  // namespace netsense
