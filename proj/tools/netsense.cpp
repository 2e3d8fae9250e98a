#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netsense/pipeline.hpp"
#include "netsense/rng.hpp"
#include "netsense/synth.hpp"
#include "netsense/tmx.hpp"

namespace fs = std::filesystem;
using namespace netsense;

namespace {

constexpr const char* kVersion = "1.0.0";

struct KeyFlags {
    std::optional<std::string> file;
    std::optional<std::string> env;
};

void add_key_flags(CLI::App* cmd, KeyFlags& flags, bool required) {
    auto* fopt = cmd->add_option("--key-file", flags.file, "Key file (64 hex characters)");
    auto* eopt = cmd->add_option("--key-env", flags.env,
                                 "Environment variable holding the 64-hex-character key");
    fopt->excludes(eopt);
    if (required) {
        // exactly one of the two; checked again in resolve_key
        cmd->callback([&flags]() {
            if (!flags.file && !flags.env) {
                throw CLI::ValidationError("--key-file or --key-env is required");
            }
        });
    }
}

void write_report_file(const std::string& json, const std::optional<std::string>& path) {
    if (!path) {
        return;
    }
    std::ofstream out(*path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write report to " + *path);
    }
    out << json;
}

// Accepts tar paths directly or directories to scan for *.tar.
std::vector<fs::path> collect_archives(const std::vector<std::string>& args) {
    std::vector<fs::path> out;
    for (const std::string& a : args) {
        const fs::path p(a);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".tar") {
                    found.push_back(entry.path());
                }
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

fs::path numbered_path(const fs::path& base, std::uint64_t index) {
    fs::path p = base;
    const std::string stem = p.stem().string();
    const std::string ext = p.extension().string();
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03llu", static_cast<unsigned long long>(index));
    p.replace_filename(stem + suffix + ext);
    return p;
}

int cmd_synth(const SynthConfig& config, const std::string& out, std::uint64_t n_files) {
    if (n_files == 0) {
        throw CLI::ValidationError("--files must be >= 1");
    }
    const std::vector<IpPair> pairs = generate_pairs(config);

    std::vector<fs::path> written;
    const std::uint64_t per_file = (pairs.size() + n_files - 1) / std::max<std::uint64_t>(n_files, 1);
    for (std::uint64_t k = 0; k < n_files; ++k) {
        const std::uint64_t begin = std::min<std::uint64_t>(k * per_file, pairs.size());
        const std::uint64_t end = std::min<std::uint64_t>(begin + per_file, pairs.size());
        const fs::path path = n_files == 1 ? fs::path(out) : numbered_path(out, k);
        write_pcap_file(std::span<const IpPair>(pairs).subspan(begin, end - begin), config, path,
                        begin);
        written.push_back(path);
    }

    std::cerr << "synth: seed=" << config.seed << " packets=" << config.n_packets
              << " sources=" << config.n_sources << " destinations=" << config.n_destinations
              << " link_type=" << config.link_type << '\n';
    nlohmann::ordered_json j;
    j["packets"] = pairs.size();
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& p : written) {
        files.push_back(p.string());
    }
    j["files"] = std::move(files);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_process(const KeyFlags& key_flags, const std::vector<std::string>& inputs,
                std::uint64_t window, std::uint32_t per_tar, const std::string& out_dir,
                const std::optional<std::string>& report, bool no_cache,
                std::uint64_t progress_interval) {
    ProcessOptions options;
    options.key = resolve_key(key_flags.file, key_flags.env);
    options.inputs.assign(inputs.begin(), inputs.end());
    options.window.packets_per_window = window;
    options.layout.matrices_per_tar = per_tar;
    options.layout.output_directory = out_dir;
    options.use_anon_cache = !no_cache;
    options.progress_interval = progress_interval;

    const ProcessResult result = run_process(options, &std::cerr);
    const std::string json = process_report_json(result);
    std::cout << json;
    write_report_file(json, report);
    return 0;
}

int cmd_analyze(const KeyFlags& key_flags, const std::vector<std::string>& archive_args,
                const std::optional<std::uint64_t>& window,
                const std::optional<std::string>& report) {
    AnalyzeOptions options;
    options.archives = collect_archives(archive_args);
    options.window_size = window;
    if (key_flags.file || key_flags.env) {
        options.key_fingerprint = key_fingerprint(resolve_key(key_flags.file, key_flags.env));
    }

    const AnalyzeResult result = run_analyze(options, &std::cerr);
    const std::string json = stats_to_json(result.stats, result.meta);
    std::cout << json;
    write_report_file(json, report);
    std::cerr << stats_table(result.stats);
    return 0;
}

int cmd_verify(const KeyFlags& key_flags, const std::vector<std::string>& inputs,
               std::uint64_t window, const std::vector<std::string>& archive_args) {
    VerifyOptions options;
    options.key = resolve_key(key_flags.file, key_flags.env);
    options.inputs.assign(inputs.begin(), inputs.end());
    options.window.packets_per_window = window;
    options.archives = collect_archives(archive_args);

    const VerifyResult result = run_verify(options, &std::cerr);
    std::cout << verify_report_json(result);
    if (!result.match()) {
        std::cerr << "verify: MISMATCH on " << result.diffs.size() << " field(s)\n";
        for (const FieldDiff& d : result.diffs) {
            std::cerr << "  " << d.field << ": pipeline=" << d.lhs << " oracle=" << d.rhs << '\n';
        }
        return 1;
    }
    std::cerr << "verify: all fields match\n";
    return 0;
}

int cmd_info() {
    SplitMix64 rng(42);
    std::cout << "netsense " << kVersion << "\n\n"
              << "TMX matrix container, version " << tmx::kVersion << " (little-endian):\n"
              << "  \"TMX1\" | version u32 | flags u32 | reserved u32 |\n"
              << "  window_index u64 (0xffffffffffffffff = aggregate) | nnz u64 |\n"
              << "  nnz triples (row u32, col u32, count u64), ascending (row, col)\n"
              << "  file length = 32 + 16*nnz bytes\n\n"
              << "Archives: POSIX ustar, zeroed metadata, members tm_<window>.tmx,\n"
              << "  archives tm_<first>_<last>.tar, default 64 matrices per archive\n\n"
              << "Defaults: window 131072 pairs, 64 matrices per archive\n\n"
              << "Generator: SplitMix64; outputs for seed 42:\n";
    std::cout << std::hex;
    for (int i = 0; i < 3; ++i) {
        std::cout << "  0x" << rng.next() << '\n';
    }
    std::cout << std::dec;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preserving network sensing pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::optional<int> workers;
    app.add_option("--workers", workers, "Worker thread count (default: hardware)")
        ->check(CLI::PositiveNumber);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate seeded synthetic captures");
    SynthConfig synth_config;
    std::string synth_out;
    std::uint64_t synth_files = 1;
    std::string synth_link = "ethernet";
    synth->add_option("--seed", synth_config.seed, "Random seed");
    synth->add_option("--packets", synth_config.n_packets, "IPv4 packets to generate");
    synth->add_option("--sources", synth_config.n_sources, "Source pool size")
        ->check(CLI::PositiveNumber);
    synth->add_option("--dests", synth_config.n_destinations, "Destination pool size")
        ->check(CLI::PositiveNumber);
    synth->add_option("--source-exponent", synth_config.source_exponent,
                      "Zipf exponent for sources (0 = uniform)");
    synth->add_option("--dest-exponent", synth_config.destination_exponent,
                      "Zipf exponent for destinations (0 = uniform)");
    synth->add_option("--link-type", synth_link, "ethernet or raw")
        ->check(CLI::IsMember({"ethernet", "raw"}));
    synth->add_option("--ts-start", synth_config.timestamp_start, "First timestamp (seconds)");
    synth->add_option("--interval-micros", synth_config.inter_packet_micros,
                      "Microseconds between packets");
    synth->add_option("--noise", synth_config.noise_fraction,
                      "Fraction of interleaved non-IPv4 frames");
    synth->add_option("--files", synth_files, "Split output across this many captures");
    synth->add_option("--out", synth_out, "Output capture path")->required();

    // process
    auto* process = app.add_subcommand("process", "Captures -> anonymized traffic-matrix archives");
    KeyFlags process_key;
    std::vector<std::string> process_inputs;
    std::uint64_t process_window = kDefaultWindow;
    std::uint32_t process_per_tar = 64;
    std::string process_out_dir;
    std::optional<std::string> process_report;
    bool process_no_cache = false;
    std::uint64_t process_progress = 1ull << 22;
    process->add_option("inputs", process_inputs, "Input capture files")->required();
    add_key_flags(process, process_key, true);
    process->add_option("--window", process_window, "Pairs per traffic matrix")
        ->check(CLI::PositiveNumber);
    process->add_option("--per-tar", process_per_tar, "Matrices per archive")
        ->check(CLI::PositiveNumber);
    process->add_option("--out-dir", process_out_dir, "Archive output directory")->required();
    process->add_option("--report", process_report, "Also write the JSON report here");
    process->add_flag("--no-anon-cache", process_no_cache,
                      "Disable the address memoization cache");
    process->add_option("--progress-interval", process_progress,
                        "Pairs between progress lines on stderr (0 = quiet)");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Sum archives and compute network statistics");
    KeyFlags analyze_key;
    std::vector<std::string> analyze_archives;
    std::optional<std::uint64_t> analyze_window;
    std::optional<std::string> analyze_report;
    analyze->add_option("archives", analyze_archives, "Archive files or directories")->required();
    add_key_flags(analyze, analyze_key, false);
    analyze->add_option("--window", analyze_window, "Window size recorded in report metadata");
    analyze->add_option("--report", analyze_report, "Also write the JSON report here");

    // verify
    auto* verify = app.add_subcommand("verify", "Diff the pipeline against the brute-force oracle");
    KeyFlags verify_key;
    std::vector<std::string> verify_inputs;
    std::uint64_t verify_window = kDefaultWindow;
    std::vector<std::string> verify_archives;
    verify->add_option("inputs", verify_inputs, "Input capture files")->required();
    add_key_flags(verify, verify_key, true);
    verify->add_option("--window", verify_window, "Pairs per traffic matrix")
        ->check(CLI::PositiveNumber);
    verify->add_option("--archives", verify_archives,
                       "Verify these existing archives instead of re-accumulating");

    // info
    app.add_subcommand("info", "Print format and generator details");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (workers) {
        omp_set_num_threads(*workers);
    }

    try {
        if (app.got_subcommand(synth)) {
            synth_config.link_type = synth_link == "raw" ? kLinkTypeRawIp : kLinkTypeEthernet;
            return cmd_synth(synth_config, synth_out, synth_files);
        }
        if (app.got_subcommand(process)) {
            return cmd_process(process_key, process_inputs, process_window, process_per_tar,
                               process_out_dir, process_report, process_no_cache,
                               process_progress);
        }
        if (app.got_subcommand(analyze)) {
            return cmd_analyze(analyze_key, analyze_archives, analyze_window, analyze_report);
        }
        if (app.got_subcommand(verify)) {
            return cmd_verify(verify_key, verify_inputs, verify_window, verify_archives);
        }
        return cmd_info();
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const KeyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
