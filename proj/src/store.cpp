#include "netsense/store.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

#include "netsense/bytes.hpp"
#include "netsense/tmx.hpp"

namespace netsense {

std::string tar_name(std::uint64_t first_window, std::uint64_t last_window) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "tm_%" PRIu64 "_%" PRIu64 ".tar", first_window, last_window);
    return buf;
}

GroupWriter::GroupWriter(StoreLayout layout) : layout_(std::move(layout)) {
    if (layout_.matrices_per_tar == 0) {
        throw StoreError("matrices_per_tar must be >= 1");
    }
    std::filesystem::create_directories(layout_.output_directory);
}

GroupWriter::~GroupWriter() {
    if (!done_) {
        try {
            discard();
        } catch (...) {
        }
    }
}

void GroupWriter::add(const TrafficMatrix& m) {
    if (!current_) {
        current_first_ = m.window_index();
        current_tmp_ = layout_.output_directory / (".tm_" + std::to_string(current_first_) +
                                                   ".tar.partial");
        current_.emplace(current_tmp_);
        current_members_ = 0;
    }
    const std::vector<std::uint8_t> bytes = tmx::write_matrix(m);
    current_->add_file(tmx::member_name(m.window_index()), bytes);
    current_last_ = m.window_index();
    current_members_++;
    matrices_written_++;
    if (current_members_ == layout_.matrices_per_tar) {
        roll();
    }
}

void GroupWriter::roll() {
    current_->close();
    current_.reset();
    const std::filesystem::path final_path =
        layout_.output_directory / tar_name(current_first_, current_last_);
    std::filesystem::rename(current_tmp_, final_path);
    finished_.push_back(final_path);
}

std::vector<std::filesystem::path> GroupWriter::finish() {
    if (current_) {
        roll();
    }
    done_ = true;
    return finished_;
}

void GroupWriter::discard() {
    std::error_code ec;
    if (current_) {
        current_->close();
        current_.reset();
        std::filesystem::remove(current_tmp_, ec);
    }
    for (const auto& path : finished_) {
        std::filesystem::remove(path, ec);
    }
    finished_.clear();
    done_ = true;
}

std::vector<std::filesystem::path> write_group(std::span<const TrafficMatrix> matrices,
                                               const StoreLayout& layout) {
    if (matrices.empty()) {
        throw StoreError("no matrices to write");
    }
    GroupWriter writer(layout);
    for (const TrafficMatrix& m : matrices) {
        writer.add(m);
    }
    return writer.finish();
}

GroupReader::GroupReader(std::vector<std::filesystem::path> paths, WarnSink warn)
    : paths_(std::move(paths)) {
    // Index every member up front: name, offset, and the window index taken
    // from the TMX header (first 32 bytes), never from the member name.
    for (std::size_t pi = 0; pi < paths_.size(); ++pi) {
        TarReader reader(paths_[pi]);
        while (auto entry = reader.next_entry()) {
            if (entry->size < tmx::kHeaderSize) {
                throw StoreError(paths_[pi].string() + ": member " + entry->name +
                                 ": shorter than a TMX header");
            }
            TarEntry probe = *entry;
            probe.size = tmx::kHeaderSize;
            const std::vector<std::uint8_t> head = reader.read_data(probe);
            const std::uint64_t window = load_le64(head.data() + 16);
            index_.push_back(IndexEntry{window, pi, *entry});
        }
    }
    std::stable_sort(index_.begin(), index_.end(),
                     [](const IndexEntry& a, const IndexEntry& b) { return a.window < b.window; });

    if (warn) {
        for (std::size_t i = 1; i < index_.size(); ++i) {
            if (index_[i].window != index_[i - 1].window + 1) {
                warn("window indices are not contiguous (gap after window " +
                     std::to_string(index_[i - 1].window) + ")");
                break;
            }
        }
    }
}

std::optional<TrafficMatrix> GroupReader::next() {
    if (pos_ >= index_.size()) {
        return std::nullopt;
    }
    const IndexEntry& ie = index_[pos_++];
    const std::filesystem::path& path = paths_[ie.path_idx];
    try {
        TarReader reader(path);
        return tmx::read_matrix(reader.read_data(ie.entry));
    } catch (const tmx::TmxError& e) {
        throw StoreError(path.string() + ": member " + ie.entry.name + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw StoreError(path.string() + ": member " + ie.entry.name + ": " + e.what());
    } catch (const TarError& e) {
        throw StoreError(std::string(e.what()) + " (member " + ie.entry.name + ")");
    }
}

std::vector<TrafficMatrix> read_group(const std::vector<std::filesystem::path>& paths,
                                      const WarnSink& warn) {
    GroupReader reader(paths, warn);
    std::vector<TrafficMatrix> out;
    while (auto m = reader.next()) {
        out.push_back(std::move(*m));
    }
    return out;
}

}  // namespace netsense
