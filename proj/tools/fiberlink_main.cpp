// Command-line front end for the fiberlink library. Talks to the shared
// library exclusively through the C API.

#include "fiberlink.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

int exit_code_for(fl_status status) {
    switch (status) {
        case FL_OK: return 0;
        case FL_ERR_INVALID:
        case FL_ERR_CONFIG: return 2;
        case FL_ERR_DATA:
        case FL_ERR_IO: return 3;
        default: return 1;
    }
}

int finish(fl_status status) {
    if (status != FL_OK) std::fprintf(stderr, "error: %s\n", fl_last_error());
    return exit_code_for(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fiberlink: simulation and analysis of hybrid optical-fiber "
                 "frequency-transfer links"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("fiberlink ") + fl_version());

    // simulate
    auto* sim = app.add_subcommand("simulate",
                                   "run the configured campaign and write counter files");
    std::string sim_config;
    std::string sim_out;
    std::uint64_t sim_seed = 0;
    bool sim_has_seed = false;
    sim->add_option("-c,--config", sim_config, "campaign config (JSON)")->required();
    sim->add_option("-o,--out", sim_out, "output directory (default: config 'outputs')");
    sim->add_option("-s,--seed", sim_seed, "override the configured seed list")
        ->each([&](const std::string&) { sim_has_seed = true; });

    // analyze
    auto* ana = app.add_subcommand("analyze", "derive observables and run analyses");
    std::vector<std::string> ana_inputs;
    std::vector<std::string> ana_analyses;
    std::string ana_out;
    std::string ana_config;
    double ana_tau = 0.0;
    bool ana_has_tau = false;
    double ana_deslip = 0.0;
    ana->add_option("inputs", ana_inputs, "counter files (one per counter kind)")->required();
    ana->add_option("-o,--out", ana_out, "output directory")->required();
    ana->add_option("-a,--analyses", ana_analyses,
                    "subset of: stability psd accuracy reciprocity correlation ledger");
    ana->add_option("--tau-avg", ana_tau, "averaging time for accuracy/reciprocity (s)")
        ->each([&](const std::string&) { ana_has_tau = true; });
    ana->add_option("--config", ana_config, "originating config (for the ledger analysis)");
    ana->add_option("--deslip", ana_deslip,
                    "flag cycle slips beyond this sigma threshold before analysis");

    // report
    auto* rep = app.add_subcommand("report", "print the summary of an analysis directory");
    std::string rep_dir;
    rep->add_option("dir", rep_dir, "analysis directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        const uint64_t* seed = sim_has_seed ? &sim_seed : nullptr;
        const char* out = sim_out.empty() ? nullptr : sim_out.c_str();
        return finish(fl_run_simulate(sim_config.c_str(), out, seed));
    }

    if (ana->parsed()) {
        std::vector<const char*> inputs;
        for (const auto& s : ana_inputs) inputs.push_back(s.c_str());
        std::vector<const char*> analyses;
        for (const auto& s : ana_analyses) analyses.push_back(s.c_str());
        const double* tau = ana_has_tau ? &ana_tau : nullptr;
        const char* config = ana_config.empty() ? nullptr : ana_config.c_str();
        return finish(fl_run_analyze(inputs.data(), inputs.size(),
                                     analyses.empty() ? nullptr : analyses.data(),
                                     analyses.size(), ana_out.c_str(), tau, config,
                                     ana_deslip));
    }

    if (rep->parsed()) {
        char* text = nullptr;
        const fl_status status = fl_render_report(rep_dir.c_str(), &text);
        if (status == FL_OK && text) {
            std::fputs(text, stdout);
            fl_string_free(text);
        }
        return finish(status);
    }

    return 1;
}
