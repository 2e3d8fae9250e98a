#include "netsense/anonymizer.hpp"

#include <openssl/evp.h>
#include <omp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <sstream>

#include "netsense/bytes.hpp"

namespace netsense {

namespace {

struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

// One AES-128-ECB encryption session. Cheap to create relative to a batch of
// blocks; each thread owns its own.
class Aes128Ecb {
public:
    explicit Aes128Ecb(std::span<const std::uint8_t, 16> key)
        : ctx_(EVP_CIPHER_CTX_new()) {
        if (!ctx_ ||
            EVP_EncryptInit_ex(ctx_.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) {
            throw std::runtime_error("AES-128 init failed");
        }
        EVP_CIPHER_CTX_set_padding(ctx_.get(), 0);
    }

    void encrypt(const std::uint8_t* in, std::uint8_t* out, std::size_t blocks) {
        int outl = 0;
        const int len = static_cast<int>(blocks * 16);
        if (EVP_EncryptUpdate(ctx_.get(), out, &outl, in, len) != 1 || outl != len) {
            throw std::runtime_error("AES-128 encrypt failed");
        }
    }

private:
    std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> ctx_;
};

// Core of the construction: build the 32 prefix blocks for `addr`, encrypt
// them in one batch, and fold the output MSBs into a one-time pad.
std::uint32_t anonymize_with(Aes128Ecb& aes, const std::array<std::uint8_t, 16>& pad_block,
                             std::uint32_t addr) {
    const std::uint32_t pad_top = load_be32(pad_block.data());

    std::uint8_t blocks[32 * 16];
    for (int pos = 0; pos < 32; ++pos) {
        std::uint8_t* block = blocks + pos * 16;
        std::copy(pad_block.begin(), pad_block.end(), block);
        std::uint32_t top = pad_top;
        if (pos > 0) {
            const std::uint32_t keep = (addr >> (32 - pos)) << (32 - pos);
            top = keep | ((pad_top << pos) >> pos);
        }
        store_be32(block, top);
    }

    std::uint8_t enc[32 * 16];
    aes.encrypt(blocks, enc, 32);

    std::uint32_t flip_pad = 0;
    for (int pos = 0; pos < 32; ++pos) {
        flip_pad |= static_cast<std::uint32_t>(enc[pos * 16] >> 7) << (31 - pos);
    }
    return addr ^ flip_pad;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

AnonKey AnonKey::from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != 32) {
        throw KeyLengthError("key material must be exactly 32 bytes, got " +
                             std::to_string(bytes.size()));
    }
    AnonKey key;
    std::copy_n(bytes.begin(), 16, key.cipher_key.begin());
    std::copy_n(bytes.begin() + 16, 16, key.pad_seed.begin());
    return key;
}

AnonKey AnonKey::from_hex(std::string_view hex) {
    while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.front()))) {
        hex.remove_prefix(1);
    }
    while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) {
        hex.remove_suffix(1);
    }
    if (hex.size() != 64) {
        throw KeyLengthError("key must be 64 hex characters, got " + std::to_string(hex.size()));
    }
    std::array<std::uint8_t, 32> bytes{};
    for (std::size_t i = 0; i < 32; ++i) {
        const int hi = hex_nibble(hex[2 * i]);
        const int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw KeyFormatError("key contains a non-hex character");
        }
        bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return from_bytes(bytes);
}

AnonKey AnonKey::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw KeyError("cannot open key file " + path.string());
    }
    std::ostringstream contents;
    contents << in.rdbuf();
    return from_hex(contents.str());
}

std::string key_fingerprint(const AnonKey& key) {
    std::array<std::uint8_t, 32> material{};
    std::copy(key.cipher_key.begin(), key.cipher_key.end(), material.begin());
    std::copy(key.pad_seed.begin(), key.pad_seed.end(), material.begin() + 16);

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(material.data(), material.size(), digest, &digest_len, EVP_sha256(), nullptr) !=
        1) {
        throw std::runtime_error("SHA-256 failed");
    }

    static const char* kHex = "0123456789abcdef";
    std::string out;
    for (int i = 0; i < 4; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

Anonymizer Anonymizer::derive(const AnonKey& key) {
    Anonymizer a;
    a.cipher_key_ = key.cipher_key;
    // The pad seed is encrypted once under the cipher key to form the pad.
    Aes128Ecb aes(std::span<const std::uint8_t, 16>(key.cipher_key));
    aes.encrypt(key.pad_seed.data(), a.pad_block_.data(), 1);
    return a;
}

std::uint32_t Anonymizer::anonymize_ip(std::uint32_t addr) const {
    Aes128Ecb aes(std::span<const std::uint8_t, 16>(cipher_key_));
    return anonymize_with(aes, pad_block_, addr);
}

AnonymizedPair Anonymizer::anonymize_pair(IpPair p) const {
    Aes128Ecb aes(std::span<const std::uint8_t, 16>(cipher_key_));
    return AnonymizedPair(anonymize_with(aes, pad_block_, p.src),
                          anonymize_with(aes, pad_block_, p.dst));
}

void Anonymizer::anonymize_addrs(std::span<const std::uint32_t> in,
                                 std::span<std::uint32_t> out) const {
    const std::int64_t n = static_cast<std::int64_t>(in.size());
#pragma omp parallel
    {
        Aes128Ecb aes(std::span<const std::uint8_t, 16>(cipher_key_));
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] =
                anonymize_with(aes, pad_block_, in[static_cast<std::size_t>(i)]);
        }
    }
}

void Anonymizer::anonymize_addrs_serial(std::span<const std::uint32_t> in,
                                        std::span<std::uint32_t> out) const {
    Aes128Ecb aes(std::span<const std::uint8_t, 16>(cipher_key_));
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = anonymize_with(aes, pad_block_, in[i]);
    }
}

std::vector<AnonymizedPair> Anonymizer::anonymize_pairs(std::span<const IpPair> pairs) const {
    std::vector<AnonymizedPair> out(pairs.size(), AnonymizedPair(0, 0));
    const std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel
    {
        Aes128Ecb aes(std::span<const std::uint8_t, 16>(cipher_key_));
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const IpPair p = pairs[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] =
                AnonymizedPair(anonymize_with(aes, pad_block_, p.src),
                               anonymize_with(aes, pad_block_, p.dst));
        }
    }
    return out;
}

std::vector<AnonymizedPair> CachingAnonymizer::anonymize_pairs(std::span<const IpPair> pairs) {
    // Resolve the addresses the cache has not seen, in one parallel batch.
    std::vector<std::uint32_t> misses;
    for (const IpPair& p : pairs) {
        if (!cache_.contains(p.src)) {
            misses.push_back(p.src);
        }
        if (!cache_.contains(p.dst)) {
            misses.push_back(p.dst);
        }
    }
    std::sort(misses.begin(), misses.end());
    misses.erase(std::unique(misses.begin(), misses.end()), misses.end());

    if (!misses.empty()) {
        std::vector<std::uint32_t> mapped(misses.size());
        anon_->anonymize_addrs(misses, mapped);
        for (std::size_t i = 0; i < misses.size(); ++i) {
            cache_.emplace(misses[i], mapped[i]);
        }
    }

    std::vector<AnonymizedPair> out;
    out.reserve(pairs.size());
    for (const IpPair& p : pairs) {
        out.push_back(AnonymizedPair(cache_.at(p.src), cache_.at(p.dst)));
    }
    return out;
}

}  // namespace netsense
