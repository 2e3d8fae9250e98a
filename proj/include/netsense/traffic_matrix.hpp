#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "netsense/anonymizer.hpp"

namespace netsense {

constexpr std::uint64_t kDefaultWindow = 1ull << 17;

struct WindowConfig {
    std::uint64_t packets_per_window = kDefaultWindow;
};

// One nonzero cell of a traffic matrix: `count` packets from anonymized
// source `row` to anonymized destination `col`.
struct Entry {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    std::uint64_t count = 0;

    bool operator==(const Entry&) const = default;
};

struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CountOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Hypersparse 2^32 x 2^32 count matrix held as coordinates sorted strictly
// ascending by (row, col). Either one packet window or the aggregate of many.
class TrafficMatrix {
public:
    static constexpr std::uint64_t kAggregateWindow = 0xffffffffffffffffULL;

    TrafficMatrix() = default;

    // Validates sortedness, deduplication and positive counts.
    static TrafficMatrix from_entries(std::uint64_t window_index, std::vector<Entry> entries);

    std::uint64_t window_index() const { return window_index_; }
    bool is_aggregate() const { return window_index_ == kAggregateWindow; }
    std::span<const Entry> entries() const { return entries_; }
    std::uint64_t nnz() const { return entries_.size(); }
    std::uint64_t total_count() const;

    bool operator==(const TrafficMatrix&) const = default;

private:
    std::uint64_t window_index_ = 0;
    std::vector<Entry> entries_;
};

// Streaming accumulator: feeds pairs in, emits one matrix per closed window.
// Memory is bounded by the number of distinct coordinates per window, so it
// also covers window sizes too large for the buffered parallel path.
class WindowAccumulator {
public:
    WindowAccumulator(WindowConfig config, std::function<void(TrafficMatrix)> emit,
                      std::uint64_t first_window_index = 0);

    void push(AnonymizedPair p);
    // Emits the trailing partial window, if any.
    void finish();

    std::uint64_t windows_emitted() const { return next_window_ - first_window_; }

private:
    void flush();

    WindowConfig config_;
    std::function<void(TrafficMatrix)> emit_;
    std::uint64_t first_window_;
    std::uint64_t next_window_;
    std::uint64_t in_window_ = 0;
    std::unordered_map<std::uint64_t, std::uint64_t> tally_;
};

// Tallies consecutive windows of `pairs` (the final one possibly partial)
// into matrices with indices starting at `first_window_index`. The parallel
// variant fans windows out across OpenMP workers; per-window results are
// identical to the serial reference for any worker count.
std::vector<TrafficMatrix> accumulate_windows(std::span<const AnonymizedPair> pairs,
                                              const WindowConfig& config,
                                              std::uint64_t first_window_index = 0);
std::vector<TrafficMatrix> accumulate_windows_serial(std::span<const AnonymizedPair> pairs,
                                                     const WindowConfig& config,
                                                     std::uint64_t first_window_index = 0);

// Coordinate-wise sum. Commutative and associative, so any grouping of the
// inputs yields the identical aggregate. Throws EmptyInputError on an empty
// list and CountOverflowError if a cell would exceed 64 bits.
TrafficMatrix sum_matrices(std::span<const TrafficMatrix> matrices);
TrafficMatrix sum_matrices_serial(std::span<const TrafficMatrix> matrices);

// Running aggregate for streams of matrices read one at a time.
class SumAccumulator {
public:
    void add(const TrafficMatrix& m);
    std::uint64_t matrices_added() const { return added_; }
    // Final aggregate (window index = sentinel). Throws EmptyInputError if
    // nothing was added.
    TrafficMatrix take();

private:
    std::unordered_map<std::uint64_t, std::uint64_t> tally_;
    std::uint64_t added_ = 0;
};

}  // namespace netsense
