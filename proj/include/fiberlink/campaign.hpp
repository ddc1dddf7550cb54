#pragma once

#include "fiberlink/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fiberlink {

struct SimulateOptions {
    std::optional<std::uint64_t> seed_override;
};

/// Runs the simulation campaign: per seed, one Pi and one Lambda counter file
/// with the four raw channels plus a provenance sidecar for bit-exact reruns.
/// Returns the paths written.
std::vector<std::filesystem::path> run_simulate(const CampaignConfig& config,
                                                const std::filesystem::path& out_dir,
                                                const SimulateOptions& options = {});

struct AnalyzeOptions {
    std::vector<std::string> analyses;          // empty = all known analyses
    std::optional<double> tau_avg_s;            // default: record length / 4
    std::optional<std::filesystem::path> config_path; // for the ledger analysis
    double deslip_sigma = 0.0;                  // 0 = no cycle-slip pass
};

/// Reads counter files (one per counter kind), derives the TWU/TWB/TWNF
/// observables and writes the requested analysis products as plot-ready
/// columnar text plus rendered accuracy/reciprocity/correlation reports.
void run_analyze(const std::vector<std::filesystem::path>& inputs,
                 const std::filesystem::path& out_dir, const AnalyzeOptions& options = {});

/// Renders the human-readable summary of an analysis directory.
std::string render_report(const std::filesystem::path& analysis_dir);

} // namespace fiberlink
