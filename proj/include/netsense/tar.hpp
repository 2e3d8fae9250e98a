#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netsense {

struct TarError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal POSIX ustar writer producing reproducible archives: member
// metadata is fixed (mtime 0, mode 0644, uid/gid 0, no user/group names),
// so identical member data yields byte-identical archives.
class TarWriter {
public:
    explicit TarWriter(const std::filesystem::path& path);
    ~TarWriter();

    TarWriter(const TarWriter&) = delete;
    TarWriter& operator=(const TarWriter&) = delete;

    void add_file(std::string_view name, std::span<const std::uint8_t> data);

    // Writes the end-of-archive trailer. Implied by the destructor.
    void close();

private:
    std::ofstream out_;
    std::filesystem::path path_;
    bool closed_ = false;
};

struct TarEntry {
    std::string name;
    std::uint64_t size = 0;
    std::uint64_t data_offset = 0;
};

// Streaming ustar reader; validates header checksums. Only regular-file
// members are yielded.
class TarReader {
public:
    explicit TarReader(const std::filesystem::path& path);

    // Next member header, skipping its data. nullopt at end of archive.
    std::optional<TarEntry> next_entry();

    // Random-access fetch of one member's bytes.
    std::vector<std::uint8_t> read_data(const TarEntry& entry);

    const std::filesystem::path& path() const { return path_; }

private:
    std::ifstream in_;
    std::filesystem::path path_;
    std::uint64_t next_header_ = 0;
};

}  // namespace netsense
