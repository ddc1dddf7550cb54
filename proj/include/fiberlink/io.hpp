#pragma once

#include "fiberlink/link.hpp"
#include "fiberlink/series.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fiberlink {

/// Whole-campaign configuration: link, schedule, seeds, and requested
/// analyses. Loaded from strict JSON (unknown keys are rejected with their
/// location, and every violation is reported at once).
struct CampaignConfig {
    LinkConfig link;
    double duration_s = 86400.0;
    double internal_rate_hz = 1000.0;
    double gate_s = 1.0;
    std::vector<std::uint64_t> seeds = {1};
    std::string outputs = "out";
    std::vector<std::string> analyses = {"stability", "psd", "accuracy",
                                         "reciprocity", "correlation", "ledger"};
    long long start_mjd = 57904;
    double start_sod_s = 0.0;
    std::optional<double> tau_avg_s; // default: duration / 4

    double effective_tau_avg_s() const { return tau_avg_s ? *tau_avg_s : duration_s / 4.0; }
    void validate() const;
};

extern const std::vector<std::string> kKnownAnalyses;

CampaignConfig load_campaign_config(const std::filesystem::path& path);
CampaignConfig parse_campaign_config(const std::string& json_text);

/// Canonical JSON for the resolved config: defaults filled in, keys sorted.
std::string campaign_config_to_json(const CampaignConfig& config);

/// FNV-1a 64-bit hash of the canonical JSON, as 16 hex digits.
std::string config_hash(const CampaignConfig& config);

/// Line-oriented counter file: a delimited header block, then one row per
/// gate with a timestamp (seconds since start), one fractional-frequency
/// value per channel and a flags field (slip nibble then validity nibble).
struct CounterFileHeader {
    int version = 1;
    std::vector<std::string> channels;
    double carrier_hz = 0.0;
    double gate_s = 1.0;
    CounterKind kind = CounterKind::Pi;
    long long start_mjd = 0;
    double start_sod_s = 0.0;
    std::string config_hash;
    std::uint64_t seed = 0;
    double internal_rate_hz = 0.0;
    std::vector<std::pair<std::string, std::string>> extra; // unknown keys, order kept
};

struct CounterFile {
    CounterFileHeader header;
    std::vector<double> t_s;
    std::vector<std::vector<double>> values; // [channel][row]
    std::vector<std::uint8_t> valid_mask;    // bit per channel, bit i = channel i valid
    std::vector<std::uint8_t> slip_mask;

    std::size_t rows() const { return t_s.size(); }
    std::size_t channel_index(const std::string& name) const;
    FrequencySeries channel(const std::string& name) const;
    void set_channel_gaps(std::size_t channel, const std::vector<std::uint8_t>& valid,
                          bool slip_provenance);

    static CounterFile from_series(const CounterFileHeader& header,
                                   const std::vector<FrequencySeries>& series);
};

CounterFile read_counter_file(const std::filesystem::path& path);

/// Atomic write (temp file + rename); frequency values carry 17 significant
/// digits so a rewrite of identical data is byte-identical.
void write_counter_file(const std::filesystem::path& path, const CounterFile& file);

/// Provenance sidecar for bit-exact reruns: resolved config, hash, seed and
/// any simulation warnings.
void write_provenance_sidecar(const std::filesystem::path& path, const CampaignConfig& config,
                              std::uint64_t seed, const std::vector<std::string>& warnings);
struct SidecarData {
    CampaignConfig config;
    std::uint64_t seed = 0;
    std::string config_hash;
};
std::optional<SidecarData> read_provenance_sidecar(const std::filesystem::path& path);

/// Columnar plot data (two or three columns of %.17g values).
void write_columns(const std::filesystem::path& path, const std::string& header_comment,
                   const std::vector<std::string>& column_names,
                   const std::vector<std::vector<double>>& columns);

/// Atomic whole-file text write.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace fiberlink
