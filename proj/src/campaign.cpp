#include "fiberlink/campaign.hpp"

#include "fiberlink/counters.hpp"
#include "fiberlink/errors.hpp"
#include "fiberlink/observables.hpp"
#include "fiberlink/rng.hpp"
#include "fiberlink/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

namespace fiberlink {

namespace fs = std::filesystem;

namespace {

std::string seed_stem(std::uint64_t seed) {
    return "counters_seed" + std::to_string(seed);
}

/// Reconstructs phase (radians) from the longest contiguous run of valid
/// counter samples; used for PSD and correlation work on counted data.
PhaseSeries phase_from_counts(const FrequencySeries& y, double scale = 1.0) {
    std::size_t best_lo = 0, best_len = 0, lo = 0, len = 0;
    for (std::size_t i = 0; i <= y.size(); ++i) {
        if (i < y.size() && y.is_valid(i)) {
            if (len == 0) lo = i;
            ++len;
        } else {
            if (len > best_len) {
                best_len = len;
                best_lo = lo;
            }
            len = 0;
        }
    }
    PhaseSeries x;
    x.t0_s = y.t0_s + static_cast<double>(best_lo) * y.gate_s;
    x.dt_s = y.gate_s;
    x.carrier_hz = y.carrier_hz;
    x.phase_rad.resize(best_len + (best_len ? 1 : 0), 0.0);
    const double k = kTwoPi * y.carrier_hz * y.gate_s * scale;
    for (std::size_t i = 0; i < best_len; ++i)
        x.phase_rad[i + 1] = x.phase_rad[i] + y.y[best_lo + i] * k;
    return x;
}

struct LoadedInput {
    fs::path path;
    CounterFile file;
};

void check_headers_consistent(const std::vector<LoadedInput>& inputs) {
    const CounterFileHeader& a = inputs.front().file.header;
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        const CounterFileHeader& b = inputs[i].file.header;
        std::string diff;
        if (b.carrier_hz != a.carrier_hz) diff = "carrier_hz";
        else if (b.gate_s != a.gate_s) diff = "gate_s";
        else if (b.channels != a.channels) diff = "channels";
        else if (b.start_mjd != a.start_mjd || b.start_sod_s != a.start_sod_s) diff = "start";
        else if (b.config_hash != a.config_hash) diff = "config_hash";
        else if (b.seed != a.seed) diff = "seed";
        if (!diff.empty())
            throw data_error("header mismatch across inputs (" + diff + "): " +
                             inputs.front().path.string() + " vs " + inputs[i].path.string());
    }
    for (std::size_t i = 0; i < inputs.size(); ++i)
        for (std::size_t j = i + 1; j < inputs.size(); ++j)
            if (inputs[i].file.header.kind == inputs[j].file.header.kind)
                throw data_error("duplicate counter kind across inputs; pass one file per kind");
}

fs::path sidecar_path_for(const fs::path& input) {
    std::string stem = input.stem().string();
    for (const char* suffix : {"_pi", "_lambda"}) {
        if (stem.size() > std::strlen(suffix) &&
            stem.compare(stem.size() - std::strlen(suffix), std::string::npos, suffix) == 0) {
            stem.resize(stem.size() - std::strlen(suffix));
            break;
        }
    }
    return input.parent_path() / (stem + ".provenance.json");
}

} // namespace

std::vector<fs::path> run_simulate(const CampaignConfig& config, const fs::path& out_dir,
                                   const SimulateOptions& options) {
    config.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + out_dir.string() + ": " +
                           ec.message());

    std::vector<std::uint64_t> seeds = config.seeds;
    if (options.seed_override) seeds = {*options.seed_override};

    const std::string hash = config_hash(config);
    std::vector<fs::path> written;
    for (std::uint64_t seed : seeds) {
        ObservableSet sim =
            simulate_link(config.link, config.duration_s, config.internal_rate_hz, seed);
        sim.provenance.config_hash = hash;

        CounterFileHeader header;
        header.channels = ObservableSet::raw_names();
        header.carrier_hz = config.link.carrier_hz;
        header.gate_s = config.gate_s;
        header.start_mjd = config.start_mjd;
        header.start_sod_s = config.start_sod_s;
        header.config_hash = hash;
        header.seed = seed;
        header.internal_rate_hz = config.internal_rate_hz;

        for (CounterKind kind : {CounterKind::Pi, CounterKind::Lambda}) {
            std::vector<FrequencySeries> counted;
            counted.reserve(4);
            for (const auto& name : ObservableSet::raw_names()) {
                const PhaseSeries& phase = sim.channel(name);
                counted.push_back(kind == CounterKind::Pi ? count_pi(phase, config.gate_s)
                                                          : count_lambda(phase, config.gate_s));
            }
            header.kind = kind;
            CounterFile file = CounterFile::from_series(header, counted);
            const fs::path path =
                out_dir / (seed_stem(seed) + "_" + to_string(kind) + ".fcf");
            write_counter_file(path, file);
            written.push_back(path);
        }
        const fs::path sidecar = out_dir / (seed_stem(seed) + ".provenance.json");
        write_provenance_sidecar(sidecar, config, seed, sim.provenance.warnings);
        written.push_back(sidecar);
    }
    return written;
}

void run_analyze(const std::vector<fs::path>& inputs, const fs::path& out_dir,
                 const AnalyzeOptions& options) {
    if (inputs.empty()) throw config_error("analyze: no input files given");
    std::vector<std::string> analyses = options.analyses;
    if (analyses.empty()) {
        // Fall back to the campaign's declared analyses when the sidecar is
        // around, else run everything.
        if (auto sidecar = read_provenance_sidecar(sidecar_path_for(inputs.front())))
            analyses = sidecar->config.analyses;
        else
            analyses = kKnownAnalyses;
    }
    for (const auto& a : analyses)
        if (std::find(kKnownAnalyses.begin(), kKnownAnalyses.end(), a) == kKnownAnalyses.end())
            throw config_error("analyze: unknown analysis name '" + a + "'");
    auto wants = [&](const std::string& name) {
        return std::find(analyses.begin(), analyses.end(), name) != analyses.end();
    };

    std::vector<LoadedInput> loaded;
    for (const auto& p : inputs) loaded.push_back({p, read_counter_file(p)});
    check_headers_consistent(loaded);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + out_dir.string() + ": " +
                           ec.message());

    // Per counter kind: raw channels plus the derived observable algebra.
    struct KindData {
        CounterKind kind;
        std::map<std::string, FrequencySeries> series; // raw + derived, by name
    };
    std::vector<KindData> kinds;
    for (auto& in : loaded) {
        KindData data;
        data.kind = in.file.header.kind;
        for (const auto& name : in.file.header.channels) {
            FrequencySeries y = in.file.channel(name);
            if (options.deslip_sigma > 0.0)
                y = detect_cycle_slips(y, options.deslip_sigma).cleaned;
            data.series[name] = std::move(y);
        }
        CountedObservables derived =
            combine_counted(data.series.at("ANC"), data.series.at("RT"),
                            data.series.at("OWB"), data.series.at("OWF"));
        data.series["TWU1"] = derived.twu1;
        data.series["TWU2"] = derived.twu2;
        data.series["TWU3"] = derived.twu3;
        data.series["TWB1"] = derived.twb1;
        data.series["TWB2"] = derived.twb2;
        data.series["TWB3"] = derived.twb3;
        data.series["TWNF"] = derived.twnf;
        kinds.push_back(std::move(data));
    }

    const double record_s = static_cast<double>(loaded.front().file.rows()) *
                            loaded.front().file.header.gate_s;
    const double tau_avg = options.tau_avg_s ? *options.tau_avg_s : record_s / 4.0;

    std::vector<std::string> obs_names = ObservableSet::raw_names();
    for (const auto& n : ObservableSet::derived_names()) obs_names.push_back(n);

    if (wants("stability")) {
        for (const auto& data : kinds) {
            for (const auto& name : obs_names) {
                for (DeviationEstimator est :
                     {DeviationEstimator::Oadev, DeviationEstimator::Mdev}) {
                    StabilityCurve curve = stability_deviation(data.series.at(name), est);
                    std::vector<double> taus, devs, cis;
                    for (const auto& p : curve.points) {
                        taus.push_back(p.tau_s);
                        devs.push_back(p.dev);
                        cis.push_back(p.ci_1sigma);
                    }
                    write_columns(out_dir / ("stability__" + name + "__" +
                                             to_string(data.kind) + "__" + to_string(est) +
                                             ".dat"),
                                  "fractional-frequency stability of " + name + " (" +
                                      to_string(data.kind) + " counter, " + to_string(est) + ")",
                                  {"tau_s", "dev", "ci_1sigma"}, {taus, devs, cis});
                }
            }
        }
    }

    if (wants("psd")) {
        for (const auto& data : kinds) {
            for (const auto& name : obs_names) {
                PhaseSeries phase = phase_from_counts(data.series.at(name));
                if (phase.size() < 64) continue; // not enough contiguous data
                Psd psd = phase_psd(phase);
                write_columns(out_dir / ("psd__" + name + "__" + to_string(data.kind) + ".dat"),
                              "one-sided phase PSD of " + name + " (" + to_string(data.kind) +
                                  " counter phase)",
                              {"f_hz", "s_phi_rad2_hz"}, {psd.f_hz, psd.s_rad2_hz});
            }
        }
    }

    if (wants("accuracy")) {
        AccuracyReport report;
        report.tau_avg_s = tau_avg;
        static const std::vector<std::string> kTableObs = {"TWU1", "TWU2", "TWU3",
                                                           "TWB1", "TWB2", "TWB3"};
        for (const auto& data : kinds) {
            std::vector<std::pair<std::string, const FrequencySeries*>> rows;
            for (const auto& name : kTableObs) rows.emplace_back(name, &data.series.at(name));
            AccuracyReport part = accuracy_report(rows, tau_avg);
            for (auto& r : part.rows) report.rows.push_back(std::move(r));
        }
        write_text_file(out_dir / "accuracy.txt", render_accuracy_table(report));
        std::vector<double> means, oadevs, mdevs, ns, gaps, kinds_col;
        std::string names_comment = "observables:";
        for (const auto& r : report.rows) {
            names_comment += " " + r.observable + "/" + to_string(r.kind);
            kinds_col.push_back(r.kind == CounterKind::Pi ? 0.0 : 1.0);
            means.push_back(r.mean);
            oadevs.push_back(r.oadev_at_tau);
            mdevs.push_back(r.mdev_at_tau);
            ns.push_back(static_cast<double>(r.n_samples));
            gaps.push_back(r.gap_fraction);
        }
        write_columns(out_dir / "accuracy.dat", names_comment,
                      {"kind", "mean", "oadev_at_tau", "mdev_at_tau", "n_samples",
                       "gap_fraction"},
                      {kinds_col, means, oadevs, mdevs, ns, gaps});
    }

    if (wants("reciprocity")) {
        std::string text = "Reciprocity of the bidirectional fiber\n";
        char buf[160];
        std::snprintf(buf, sizeof buf, "averaging time: %.0f s, verdict threshold: 1 sigma\n\n",
                      tau_avg);
        text += buf;
        std::vector<double> means, oadevs, mdevs, uncs, verdicts;
        for (const auto& data : kinds) {
            for (const char* name : {"TWB3", "TWNF"}) {
                ReciprocityResult r = reciprocity_estimate(data.series.at(name), tau_avg);
                std::snprintf(buf, sizeof buf, "%-5s (%s): %s  [%s]\n", name,
                              to_string(data.kind).c_str(), r.rendered.c_str(),
                              r.consistent_with_zero ? "consistent with zero"
                                                     : "NOT consistent with zero");
                text += buf;
                means.push_back(r.mean);
                oadevs.push_back(r.oadev_at_tau);
                mdevs.push_back(r.mdev_at_tau);
                uncs.push_back(r.uncertainty);
                verdicts.push_back(r.consistent_with_zero ? 1.0 : 0.0);
            }
        }
        write_text_file(out_dir / "reciprocity.txt", text);
        write_columns(out_dir / "reciprocity.dat", "rows: {TWB3,TWNF} per counter kind",
                      {"mean", "oadev_at_tau", "mdev_at_tau", "uncertainty",
                       "consistent_with_zero"},
                      {means, oadevs, mdevs, uncs, verdicts});
    }

    if (wants("correlation")) {
        // Pearson on counted phase; Lambda data preferred when present.
        const KindData* best = &kinds.front();
        for (const auto& data : kinds)
            if (data.kind == CounterKind::Lambda) best = &data;
        std::string text = "Noise correlation between counted phase records (";
        text += to_string(best->kind) + " counting)\n\n";
        const std::vector<std::pair<std::string, std::pair<std::string, double>>> pairs = {
            {"ANC vs RT/2", {"RT", 0.5}},
            {"OWB vs RT/2", {"RT", 0.5}},
            {"OWF vs RT/2", {"RT", 0.5}},
            {"OWB vs OWF", {"OWF", 1.0}},
        };
        const std::vector<std::string> firsts = {"ANC", "OWB", "OWF", "OWB"};
        std::vector<double> rs;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            PhaseSeries a = phase_from_counts(best->series.at(firsts[i]));
            PhaseSeries b =
                phase_from_counts(best->series.at(pairs[i].second.first), pairs[i].second.second);
            double r = cross_correlation(a, b);
            rs.push_back(r);
            text += pairs[i].first + ": " + format_correlation(r) + "\n";
        }
        write_text_file(out_dir / "correlation.txt", text);
        write_columns(out_dir / "correlation.dat",
                      "pairs: ANC~RT/2 OWB~RT/2 OWF~RT/2 OWB~OWF", {"r"}, {rs});
    }

    if (wants("ledger")) {
        // Predicted interferometric phase needs the originating configuration.
        std::optional<SidecarData> sidecar;
        if (options.config_path) {
            SidecarData data;
            data.config = load_campaign_config(*options.config_path);
            data.seed = loaded.front().file.header.seed;
            sidecar = std::move(data);
        } else {
            sidecar = read_provenance_sidecar(sidecar_path_for(loaded.front().path));
            if (sidecar) sidecar->seed = loaded.front().file.header.seed;
        }
        if (!sidecar)
            throw config_error(
                "ledger analysis needs the originating config: pass --config or keep the "
                "provenance sidecar next to the counter file");

        const CampaignConfig& cfg = sidecar->config;
        const std::size_t rows = loaded.front().file.rows();
        // Stochastic temperature terms reproduce the simulation only when the
        // internal rate equals the gate rate; deterministic terms always do.
        std::vector<double> temp = gen_temperature(cfg.link.temperature, rows,
                                                   loaded.front().file.header.gate_s,
                                                   derive_seed(sidecar->seed, 3));
        for (auto& v : temp) v -= cfg.link.temperature.mean_k;
        InterferometricLedger ledger = predict_interferometric_ledger(
            cfg.link, temp, loaded.front().file.header.gate_s);

        std::vector<std::vector<double>> cols;
        std::vector<std::string> names = {"t_s"};
        cols.push_back(loaded.front().file.t_s);
        for (const auto& name : InterferometricLedger::names()) {
            const PhaseSeries& s = ledger.channel(name);
            std::vector<double> fs_col(rows);
            for (std::size_t i = 0; i < rows; ++i) fs_col[i] = s.time_error_s(i) * 1e15;
            cols.push_back(std::move(fs_col));
            names.push_back(name + "_fs");
        }
        write_columns(out_dir / "ledger.dat",
                      "predicted interferometric time error per observable (femtoseconds)",
                      names, cols);
    }
}

std::string render_report(const fs::path& analysis_dir) {
    std::string out;
    const std::vector<std::pair<const char*, const char*>> sections = {
        {"accuracy.txt", "ACCURACY"},
        {"reciprocity.txt", "RECIPROCITY"},
        {"correlation.txt", "CORRELATION"},
    };
    bool any = false;
    for (const auto& [file, title] : sections) {
        const fs::path p = analysis_dir / file;
        if (!fs::exists(p)) continue;
        any = true;
        out += std::string("==== ") + title + " ====\n";
        out += read_text_file(p);
        out += "\n";
    }
    if (!any)
        throw data_error("no analysis products found in " + analysis_dir.string() +
                         " (run analyze first)");
    return out;
}

} // namespace fiberlink
