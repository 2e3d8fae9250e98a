#include "netsense/traffic_matrix.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <utility>

namespace netsense {

namespace {

constexpr std::uint64_t coord_key(std::uint32_t row, std::uint32_t col) {
    return (static_cast<std::uint64_t>(row) << 32) | col;
}

Entry key_to_entry(std::uint64_t key, std::uint64_t count) {
    return Entry{static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key), count};
}

// Sort-and-run-length-encode tally of one window slice.
TrafficMatrix tally_window(std::span<const AnonymizedPair> pairs, std::uint64_t window_index) {
    std::vector<std::uint64_t> keys;
    keys.reserve(pairs.size());
    for (const AnonymizedPair& p : pairs) {
        keys.push_back(coord_key(p.src(), p.dst()));
    }
    std::sort(keys.begin(), keys.end());

    std::vector<Entry> entries;
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) {
            ++j;
        }
        entries.push_back(key_to_entry(keys[i], j - i));
        i = j;
    }
    return TrafficMatrix::from_entries(window_index, std::move(entries));
}

TrafficMatrix matrix_from_tally(std::unordered_map<std::uint64_t, std::uint64_t>& tally,
                                std::uint64_t window_index) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cells(tally.begin(), tally.end());
    std::sort(cells.begin(), cells.end());
    std::vector<Entry> entries;
    entries.reserve(cells.size());
    for (const auto& [key, count] : cells) {
        entries.push_back(key_to_entry(key, count));
    }
    tally.clear();
    return TrafficMatrix::from_entries(window_index, std::move(entries));
}

void add_checked(std::uint64_t& cell, std::uint64_t amount) {
    if (cell > UINT64_MAX - amount) {
        throw CountOverflowError("traffic matrix cell count exceeds 64 bits");
    }
    cell += amount;
}

}  // namespace

TrafficMatrix TrafficMatrix::from_entries(std::uint64_t window_index, std::vector<Entry> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].count == 0) {
            throw std::invalid_argument("traffic matrix entry with zero count");
        }
        if (i > 0) {
            const std::uint64_t prev = coord_key(entries[i - 1].row, entries[i - 1].col);
            const std::uint64_t cur = coord_key(entries[i].row, entries[i].col);
            if (prev >= cur) {
                throw std::invalid_argument("traffic matrix entries not strictly sorted");
            }
        }
    }
    TrafficMatrix m;
    m.window_index_ = window_index;
    m.entries_ = std::move(entries);
    return m;
}

std::uint64_t TrafficMatrix::total_count() const {
    std::uint64_t total = 0;
    for (const Entry& e : entries_) {
        total += e.count;
    }
    return total;
}

WindowAccumulator::WindowAccumulator(WindowConfig config, std::function<void(TrafficMatrix)> emit,
                                     std::uint64_t first_window_index)
    : config_(config), emit_(std::move(emit)), first_window_(first_window_index),
      next_window_(first_window_index) {
    if (config_.packets_per_window == 0) {
        throw std::invalid_argument("packets_per_window must be >= 1");
    }
}

void WindowAccumulator::push(AnonymizedPair p) {
    tally_[coord_key(p.src(), p.dst())]++;
    if (++in_window_ == config_.packets_per_window) {
        flush();
    }
}

void WindowAccumulator::finish() {
    if (in_window_ > 0) {
        flush();
    }
}

void WindowAccumulator::flush() {
    emit_(matrix_from_tally(tally_, next_window_));
    next_window_++;
    in_window_ = 0;
}

std::vector<TrafficMatrix> accumulate_windows(std::span<const AnonymizedPair> pairs,
                                              const WindowConfig& config,
                                              std::uint64_t first_window_index) {
    if (config.packets_per_window == 0) {
        throw std::invalid_argument("packets_per_window must be >= 1");
    }
    const std::uint64_t window = config.packets_per_window;
    const std::uint64_t n_windows = (pairs.size() + window - 1) / window;
    std::vector<TrafficMatrix> out(static_cast<std::size_t>(n_windows));

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t w = 0; w < static_cast<std::int64_t>(n_windows); ++w) {
        const std::uint64_t begin = static_cast<std::uint64_t>(w) * window;
        const std::uint64_t end = std::min<std::uint64_t>(begin + window, pairs.size());
        out[static_cast<std::size_t>(w)] =
            tally_window(pairs.subspan(begin, end - begin), first_window_index + w);
    }
    return out;
}

std::vector<TrafficMatrix> accumulate_windows_serial(std::span<const AnonymizedPair> pairs,
                                                     const WindowConfig& config,
                                                     std::uint64_t first_window_index) {
    if (config.packets_per_window == 0) {
        throw std::invalid_argument("packets_per_window must be >= 1");
    }
    const std::uint64_t window = config.packets_per_window;
    std::vector<TrafficMatrix> out;
    for (std::uint64_t begin = 0; begin < pairs.size(); begin += window) {
        const std::uint64_t end = std::min<std::uint64_t>(begin + window, pairs.size());
        out.push_back(tally_window(pairs.subspan(begin, end - begin),
                                   first_window_index + begin / window));
    }
    return out;
}

TrafficMatrix sum_matrices_serial(std::span<const TrafficMatrix> matrices) {
    if (matrices.empty()) {
        throw EmptyInputError("cannot sum zero matrices");
    }
    SumAccumulator acc;
    for (const TrafficMatrix& m : matrices) {
        acc.add(m);
    }
    return acc.take();
}

TrafficMatrix sum_matrices(std::span<const TrafficMatrix> matrices) {
    if (matrices.empty()) {
        throw EmptyInputError("cannot sum zero matrices");
    }

    const int n_chunks = std::max(1, omp_get_max_threads());
    std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> partial(
        static_cast<std::size_t>(n_chunks));
    std::atomic<bool> overflow{false};

#pragma omp parallel for schedule(static)
    for (int c = 0; c < n_chunks; ++c) {
        auto& tally = partial[static_cast<std::size_t>(c)];
        const std::size_t begin = matrices.size() * static_cast<std::size_t>(c) /
                                  static_cast<std::size_t>(n_chunks);
        const std::size_t end = matrices.size() * (static_cast<std::size_t>(c) + 1) /
                                static_cast<std::size_t>(n_chunks);
        for (std::size_t i = begin; i < end; ++i) {
            for (const Entry& e : matrices[i].entries()) {
                std::uint64_t& cell = tally[coord_key(e.row, e.col)];
                if (cell > UINT64_MAX - e.count) {
                    overflow.store(true, std::memory_order_relaxed);
                    break;
                }
                cell += e.count;
            }
            if (overflow.load(std::memory_order_relaxed)) {
                break;
            }
        }
    }
    if (overflow.load()) {
        throw CountOverflowError("traffic matrix cell count exceeds 64 bits");
    }

    std::unordered_map<std::uint64_t, std::uint64_t>& total = partial[0];
    for (std::size_t c = 1; c < partial.size(); ++c) {
        for (const auto& [key, count] : partial[c]) {
            add_checked(total[key], count);
        }
    }
    return matrix_from_tally(total, TrafficMatrix::kAggregateWindow);
}

void SumAccumulator::add(const TrafficMatrix& m) {
    for (const Entry& e : m.entries()) {
        add_checked(tally_[coord_key(e.row, e.col)], e.count);
    }
    added_++;
}

TrafficMatrix SumAccumulator::take() {
    if (added_ == 0) {
        throw EmptyInputError("cannot sum zero matrices");
    }
    added_ = 0;
    return matrix_from_tally(tally_, TrafficMatrix::kAggregateWindow);
}

}  // namespace netsense
