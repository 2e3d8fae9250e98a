#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsense/pcap.hpp"  // WarnSink
#include "netsense/tar.hpp"
#include "netsense/traffic_matrix.hpp"

namespace netsense {

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StoreLayout {
    std::uint32_t matrices_per_tar = 64;
    std::filesystem::path output_directory;
};

// Archive name for a run of consecutive windows: tm_<first>_<last>.tar
std::string tar_name(std::uint64_t first_window, std::uint64_t last_window);

// Rolls window matrices into tar archives of `matrices_per_tar` members.
// Archives are written under a temporary name and renamed once complete, so
// a crash never leaves a file that looks finished.
class GroupWriter {
public:
    explicit GroupWriter(StoreLayout layout);
    ~GroupWriter();

    void add(const TrafficMatrix& m);

    // Closes the trailing archive and returns all paths in window order.
    std::vector<std::filesystem::path> finish();

    // Best-effort removal of everything written so far (fatal-error path).
    void discard();

    std::uint64_t matrices_written() const { return matrices_written_; }

private:
    void roll();

    StoreLayout layout_;
    std::optional<TarWriter> current_;
    std::filesystem::path current_tmp_;
    std::uint64_t current_first_ = 0;
    std::uint64_t current_last_ = 0;
    std::uint32_t current_members_ = 0;
    std::uint64_t matrices_written_ = 0;
    std::vector<std::filesystem::path> finished_;
    bool done_ = false;
};

// Writes `matrices` (already ordered by window index) into
// ceil(n / matrices_per_tar) archives. Empty input is an error.
std::vector<std::filesystem::path> write_group(std::span<const TrafficMatrix> matrices,
                                               const StoreLayout& layout);

// Streams matrices back out of a set of archives, sorted by window index
// regardless of the order the paths are given in. Holds one member in
// memory at a time plus a small per-member index.
class GroupReader {
public:
    explicit GroupReader(std::vector<std::filesystem::path> paths, WarnSink warn = {});

    std::optional<TrafficMatrix> next();

    std::uint64_t matrices_total() const { return index_.size(); }

private:
    struct IndexEntry {
        std::uint64_t window;
        std::size_t path_idx;
        TarEntry entry;
    };

    std::vector<std::filesystem::path> paths_;
    std::vector<IndexEntry> index_;
    std::size_t pos_ = 0;
};

std::vector<TrafficMatrix> read_group(const std::vector<std::filesystem::path>& paths,
                                      const WarnSink& warn = {});

}  // namespace netsense
