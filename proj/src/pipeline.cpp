#include "netsense/pipeline.hpp"

#include <algorithm>
#include <cstdlib>

#include <json.hpp>

namespace netsense {

namespace {

// Above this window size the buffered window-per-worker path would hold too
// many raw pairs; fall back to the streaming accumulator.
constexpr std::uint64_t kMaxBufferedWindow = 1ull << 22;
// Rough number of pairs anonymized and tallied per flush.
constexpr std::uint64_t kFlushTarget = 1ull << 21;
constexpr std::uint64_t kStreamBatch = 1ull << 16;

class ProgressMeter {
public:
    ProgressMeter(std::uint64_t interval, std::ostream* log) : interval_(interval), log_(log) {}

    void count(std::uint64_t& counter) {
        if (interval_ && log_ && ++counter % interval_ == 0) {
            *log_ << "processed " << counter << " pairs\n";
        }
    }

private:
    std::uint64_t interval_;
    std::ostream* log_;
};

}  // namespace

AnonKey resolve_key(const std::optional<std::string>& key_file,
                    const std::optional<std::string>& key_env) {
    if (key_file.has_value() == key_env.has_value()) {
        throw KeyError("exactly one of key file and key environment variable must be given");
    }
    if (key_file) {
        return AnonKey::from_file(*key_file);
    }
    const char* value = std::getenv(key_env->c_str());
    if (!value) {
        throw KeyError("environment variable " + *key_env + " is not set");
    }
    return AnonKey::from_hex(value);
}

ProcessResult run_process(const ProcessOptions& options, std::ostream* log) {
    const Anonymizer anonymizer = Anonymizer::derive(options.key);
    CachingAnonymizer cache(anonymizer);
    const std::uint64_t window = options.window.packets_per_window;
    if (window == 0) {
        throw std::invalid_argument("window size must be >= 1");
    }

    GroupWriter writer(options.layout);
    ProgressMeter progress(options.progress_interval, log);
    std::uint64_t pairs_seen = 0;

    const auto anonymize = [&](std::span<const IpPair> raw) {
        return options.use_anon_cache ? cache.anonymize_pairs(raw)
                                      : anonymizer.anonymize_pairs(raw);
    };

    std::vector<IpPair> buffer;
    IngestReport report;

    if (window <= kMaxBufferedWindow) {
        // Buffered path: flush whole windows and tally them in parallel.
        const std::uint64_t windows_per_flush =
            std::clamp<std::uint64_t>(kFlushTarget / window, 1, 4096);
        const std::uint64_t flush_pairs = windows_per_flush * window;
        buffer.reserve(flush_pairs);
        std::uint64_t next_window = 0;

        const auto flush = [&]() {
            if (buffer.empty()) {
                return;
            }
            const std::vector<AnonymizedPair> anon = anonymize(buffer);
            for (TrafficMatrix& m : accumulate_windows(anon, options.window, next_window)) {
                writer.add(m);
            }
            next_window += (buffer.size() + window - 1) / window;
            buffer.clear();
        };

        report = ingest_files(
            options.inputs,
            [&](IpPair p) {
                buffer.push_back(p);
                progress.count(pairs_seen);
                if (buffer.size() == flush_pairs) {
                    flush();
                }
            },
            [&](const std::string& message) {
                if (log) *log << "warning: " << message << '\n';
            });
        flush();
    } else {
        // Streaming path for very large windows: constant memory in the
        // number of buffered pairs, window tallies kept as hash maps.
        WindowAccumulator accumulator(options.window,
                                      [&](TrafficMatrix m) { writer.add(m); });
        const auto drain = [&]() {
            for (const AnonymizedPair& p : anonymize(buffer)) {
                accumulator.push(p);
            }
            buffer.clear();
        };
        report = ingest_files(
            options.inputs,
            [&](IpPair p) {
                buffer.push_back(p);
                progress.count(pairs_seen);
                if (buffer.size() == kStreamBatch) {
                    drain();
                }
            },
            [&](const std::string& message) {
                if (log) *log << "warning: " << message << '\n';
            });
        drain();
        accumulator.finish();
    }

    ProcessResult result;
    result.ingest = report;
    result.matrices = writer.matrices_written();
    result.archives = writer.finish();
    return result;
}

AnalyzeResult run_analyze(const AnalyzeOptions& options, std::ostream* log) {
    GroupReader reader(options.archives, [&](const std::string& message) {
        if (log) *log << "warning: " << message << '\n';
    });

    SumAccumulator sum;
    std::uint64_t matrices = 0;
    std::uint64_t largest_window_mass = 0;
    while (auto m = reader.next()) {
        if (!m->is_aggregate()) {
            largest_window_mass = std::max(largest_window_mass, m->total_count());
        }
        sum.add(*m);
        matrices++;
    }
    const TrafficMatrix aggregate = sum.take();

    AnalyzeResult result;
    result.stats = compute_stats(aggregate);
    result.meta.matrix_count = matrices;
    result.meta.key_fingerprint = options.key_fingerprint;
    if (options.window_size) {
        result.meta.window_size = options.window_size;
    } else if (largest_window_mass > 0) {
        result.meta.window_size = largest_window_mass;
    }
    return result;
}

VerifyResult run_verify(const VerifyOptions& options, std::ostream* log) {
    std::vector<IpPair> raw;
    ingest_files(
        options.inputs, [&](IpPair p) { raw.push_back(p); },
        [&](const std::string& message) {
            if (log) *log << "warning: " << message << '\n';
        });

    const Anonymizer anonymizer = Anonymizer::derive(options.key);
    const std::vector<AnonymizedPair> anon = anonymizer.anonymize_pairs(raw);

    VerifyResult result;
    result.oracle = oracle_stats(anon);

    if (!options.archives.empty()) {
        AnalyzeOptions analyze;
        analyze.archives = options.archives;
        result.pipeline = run_analyze(analyze, log).stats;
    } else if (anon.empty()) {
        result.pipeline = NetStats{};
    } else {
        const std::vector<TrafficMatrix> matrices =
            accumulate_windows(anon, options.window);
        result.pipeline = compute_stats(sum_matrices(matrices));
    }

    result.diffs = diff_stats(result.pipeline, result.oracle);
    return result;
}

std::string process_report_json(const ProcessResult& result) {
    nlohmann::ordered_json j;
    j["packets_read"] = result.ingest.packets_read;
    j["pairs_extracted"] = result.ingest.pairs_extracted;
    j["skipped_non_ipv4"] = result.ingest.skipped_non_ipv4;
    j["skipped_truncated"] = result.ingest.skipped_truncated;
    j["files_processed"] = result.ingest.files_processed;
    j["matrices"] = result.matrices;
    j["archives"] = result.archives.size();
    return j.dump(2) + "\n";
}

std::string verify_report_json(const VerifyResult& result) {
    nlohmann::ordered_json j;
    j["match"] = result.match();
    nlohmann::ordered_json fields;
    for (const NetStatsField& f : net_stats_fields()) {
        nlohmann::ordered_json row;
        row["pipeline"] = result.pipeline.*(f.member);
        row["oracle"] = result.oracle.*(f.member);
        fields[f.name] = std::move(row);
    }
    j["fields"] = std::move(fields);
    return j.dump(2) + "\n";
}

}  // namespace netsense
