#include "netsense/tar.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>

namespace netsense {

namespace {

constexpr std::size_t kBlockSize = 512;

struct UstarHeader {
    char name[100];
    char mode[8];
    char uid[8];
    char gid[8];
    char size[12];
    char mtime[12];
    char checksum[8];
    char typeflag[1];
    char linkname[100];
    char magic[6];
    char version[2];
    char uname[32];
    char gname[32];
    char devmajor[8];
    char devminor[8];
    char prefix[155];
    char pad[12];
};
static_assert(sizeof(UstarHeader) == kBlockSize);

unsigned header_checksum(const UstarHeader& hdr) {
    unsigned sum = 0;
    const auto* bytes = reinterpret_cast<const unsigned char*>(&hdr);
    for (std::size_t i = 0; i < sizeof(hdr); ++i) {
        sum += bytes[i];
    }
    return sum;
}

std::uint64_t parse_octal(const char* field, std::size_t len) {
    std::uint64_t value = 0;
    std::size_t i = 0;
    while (i < len && field[i] == ' ') {
        ++i;
    }
    for (; i < len && field[i] != '\0' && field[i] != ' '; ++i) {
        if (field[i] < '0' || field[i] > '7') {
            throw TarError("non-octal digit in header field");
        }
        value = value * 8 + static_cast<std::uint64_t>(field[i] - '0');
    }
    return value;
}

std::uint64_t padded(std::uint64_t size) {
    return (size + kBlockSize - 1) / kBlockSize * kBlockSize;
}

}  // namespace

TarWriter::TarWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) {
        throw TarError("cannot create " + path.string());
    }
}

TarWriter::~TarWriter() {
    try {
        close();
    } catch (...) {
        // destructor must not throw; close() explicitly to observe errors
    }
}

void TarWriter::add_file(std::string_view name, std::span<const std::uint8_t> data) {
    if (name.size() >= sizeof(UstarHeader{}.name)) {
        throw TarError("member name too long: " + std::string(name));
    }

    UstarHeader hdr{};
    std::memcpy(hdr.name, name.data(), name.size());
    std::memcpy(hdr.mode, "0000644", 8);
    std::memcpy(hdr.uid, "0000000", 8);
    std::memcpy(hdr.gid, "0000000", 8);
    std::snprintf(hdr.size, sizeof(hdr.size), "%011llo",
                  static_cast<unsigned long long>(data.size()));
    std::memcpy(hdr.mtime, "00000000000", 12);
    hdr.typeflag[0] = '0';
    std::memcpy(hdr.magic, "ustar", 6);
    std::memcpy(hdr.version, "00", 2);

    std::memset(hdr.checksum, ' ', sizeof(hdr.checksum));
    std::snprintf(hdr.checksum, sizeof(hdr.checksum), "%06o", header_checksum(hdr));
    hdr.checksum[7] = ' ';

    out_.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
    out_.write(reinterpret_cast<const char*>(data.data()),
               static_cast<std::streamsize>(data.size()));
    const std::uint64_t pad = padded(data.size()) - data.size();
    static const char zeros[kBlockSize] = {};
    out_.write(zeros, static_cast<std::streamsize>(pad));
    if (!out_) {
        throw TarError("write failed on " + path_.string());
    }
}

void TarWriter::close() {
    if (closed_) {
        return;
    }
    closed_ = true;
    static const char zeros[kBlockSize] = {};
    out_.write(zeros, kBlockSize);
    out_.write(zeros, kBlockSize);
    out_.close();
    if (out_.fail()) {
        throw TarError("close failed on " + path_.string());
    }
}

TarReader::TarReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path) {
    if (!in_) {
        throw TarError("cannot open " + path.string());
    }
}

std::optional<TarEntry> TarReader::next_entry() {
    UstarHeader hdr{};
    for (;;) {
        in_.clear();
        in_.seekg(static_cast<std::streamoff>(next_header_));
        in_.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
        if (static_cast<std::size_t>(in_.gcount()) < sizeof(hdr)) {
            if (in_.gcount() == 0) {
                return std::nullopt;  // clean end without trailer blocks
            }
            throw TarError(path_.string() + ": truncated header block");
        }

        static const char zeros[kBlockSize] = {};
        if (std::memcmp(&hdr, zeros, kBlockSize) == 0) {
            return std::nullopt;  // end-of-archive marker
        }

        if (std::memcmp(hdr.magic, "ustar", 5) != 0) {
            throw TarError(path_.string() + ": not a ustar header");
        }

        const unsigned stored = static_cast<unsigned>(parse_octal(hdr.checksum, 8));
        UstarHeader check = hdr;
        std::memset(check.checksum, ' ', sizeof(check.checksum));
        if (header_checksum(check) != stored) {
            throw TarError(path_.string() + ": header checksum mismatch");
        }

        TarEntry entry;
        entry.name.assign(hdr.name, strnlen(hdr.name, sizeof(hdr.name)));
        entry.size = parse_octal(hdr.size, sizeof(hdr.size));
        entry.data_offset = next_header_ + kBlockSize;
        next_header_ = entry.data_offset + padded(entry.size);

        if (hdr.typeflag[0] == '0' || hdr.typeflag[0] == '\0') {
            return entry;
        }
        // Skip directories, links and extension members.
    }
}

std::vector<std::uint8_t> TarReader::read_data(const TarEntry& entry) {
    std::vector<std::uint8_t> data(entry.size);
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(entry.data_offset));
    in_.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(entry.size));
    if (static_cast<std::uint64_t>(in_.gcount()) != entry.size) {
        throw TarError(path_.string() + ": truncated member " + entry.name);
    }
    return data;
}

}  // namespace netsense
