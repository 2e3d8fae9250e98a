#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "netsense/anonymizer.hpp"
#include "netsense/netstats.hpp"
#include "netsense/pcap.hpp"
#include "netsense/store.hpp"
#include "netsense/traffic_matrix.hpp"

namespace netsense {

// Resolves the anonymization key from a hex key file or an environment
// variable carrying the same 64-hex-character string. Exactly one source
// must be given; this runs before any packet is read.
AnonKey resolve_key(const std::optional<std::string>& key_file,
                    const std::optional<std::string>& key_env);

struct ProcessOptions {
    std::vector<std::filesystem::path> inputs;
    AnonKey key;
    WindowConfig window;
    StoreLayout layout;
    bool use_anon_cache = true;
    // Pairs between progress lines on the log stream; 0 disables.
    std::uint64_t progress_interval = 0;
};

struct ProcessResult {
    IngestReport ingest;
    std::uint64_t matrices = 0;
    std::vector<std::filesystem::path> archives;
};

// Ingest -> anonymize -> window -> archive. Anonymization happens before
// accumulation, so no raw address ever reaches a matrix or the disk.
// Partial outputs are removed if a fatal error unwinds.
ProcessResult run_process(const ProcessOptions& options, std::ostream* log = nullptr);

struct AnalyzeOptions {
    std::vector<std::filesystem::path> archives;
    // Report metadata; window_size falls back to the largest window mass
    // seen in the archives (exact whenever any window is full).
    std::optional<std::uint64_t> window_size;
    std::optional<std::string> key_fingerprint;
};

struct AnalyzeResult {
    NetStats stats;
    ReportMeta meta;
};

AnalyzeResult run_analyze(const AnalyzeOptions& options, std::ostream* log = nullptr);

struct VerifyOptions {
    std::vector<std::filesystem::path> inputs;
    AnonKey key;
    WindowConfig window;
    // When non-empty, the pipeline side reads these archives instead of
    // re-running accumulation in memory.
    std::vector<std::filesystem::path> archives;
};

struct VerifyResult {
    NetStats pipeline;
    NetStats oracle;
    std::vector<FieldDiff> diffs;

    bool match() const { return diffs.empty(); }
};

// Runs the full pipeline and the brute-force oracle on the same inputs and
// compares all statistics field by field.
VerifyResult run_verify(const VerifyOptions& options, std::ostream* log = nullptr);

std::string process_report_json(const ProcessResult& result);
std::string verify_report_json(const VerifyResult& result);

}  // namespace netsense
