#include "fiberlink.h"

#include "fiberlink/campaign.hpp"
#include "fiberlink/counters.hpp"
#include "fiberlink/errors.hpp"
#include "fiberlink/io.hpp"
#include "fiberlink/observables.hpp"
#include "fiberlink/stats.hpp"

#include <cstring>
#include <new>
#include <string>

using namespace fiberlink;

struct fl_config {
    CampaignConfig config;
};

struct fl_observables {
    ObservableSet set;
    double gate_s = 1.0;
};

struct fl_series {
    FrequencySeries series;
};

struct fl_curve {
    StabilityCurve curve;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Maps C++ exceptions onto status codes; the message stays readable via
// fl_last_error().
template <typename Fn>
fl_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const config_error& e) {
        set_error(e.what());
        return FL_ERR_CONFIG;
    } catch (const data_error& e) {
        set_error(e.what());
        return FL_ERR_DATA;
    } catch (const io_error& e) {
        set_error(e.what());
        return FL_ERR_IO;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return FL_ERR_INVALID;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return FL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return FL_ERR_INTERNAL;
    }
}

fl_status require(bool ok, const char* msg) {
    if (ok) return FL_OK;
    set_error(msg);
    return FL_ERR_INVALID;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* fl_version(void) { return FL_VERSION_STRING; }

const char* fl_last_error(void) { return g_last_error.c_str(); }

fl_status fl_config_default(fl_config** out) {
    if (fl_status s = require(out != nullptr, "fl_config_default: out is NULL"); s != FL_OK)
        return s;
    return guarded([&] {
        auto* handle = new fl_config{};
        handle->config.validate();
        *out = handle;
        return FL_OK;
    });
}

fl_status fl_config_load(const char* path, fl_config** out) {
    if (fl_status s = require(path && out, "fl_config_load: NULL argument"); s != FL_OK) return s;
    return guarded([&] {
        auto* handle = new fl_config{load_campaign_config(path)};
        *out = handle;
        return FL_OK;
    });
}

fl_status fl_config_parse(const char* json_text, fl_config** out) {
    if (fl_status s = require(json_text && out, "fl_config_parse: NULL argument"); s != FL_OK)
        return s;
    return guarded([&] {
        auto* handle = new fl_config{parse_campaign_config(json_text)};
        *out = handle;
        return FL_OK;
    });
}

void fl_config_free(fl_config* config) { delete config; }

fl_status fl_config_to_json(const fl_config* config, char** out_json) {
    if (fl_status s = require(config && out_json, "fl_config_to_json: NULL argument"); s != FL_OK)
        return s;
    return guarded([&] {
        *out_json = dup_string(campaign_config_to_json(config->config));
        return FL_OK;
    });
}

fl_status fl_config_hash(const fl_config* config, char* buf, size_t buflen) {
    if (fl_status s = require(config && buf, "fl_config_hash: NULL argument"); s != FL_OK)
        return s;
    if (fl_status s = require(buflen >= 17, "fl_config_hash: buffer must hold 17 bytes");
        s != FL_OK)
        return s;
    return guarded([&] {
        const std::string h = config_hash(config->config);
        std::memcpy(buf, h.c_str(), h.size() + 1);
        return FL_OK;
    });
}

fl_status fl_simulate(const fl_config* config, uint64_t seed, fl_observables** out) {
    if (fl_status s = require(config && out, "fl_simulate: NULL argument"); s != FL_OK) return s;
    return guarded([&] {
        auto* handle = new fl_observables{};
        handle->set = simulate_link(config->config.link, config->config.duration_s,
                                    config->config.internal_rate_hz, seed);
        handle->set.provenance.config_hash = config_hash(config->config);
        handle->gate_s = config->config.gate_s;
        *out = handle;
        return FL_OK;
    });
}

void fl_observables_free(fl_observables* set) { delete set; }

fl_status fl_observables_combine(fl_observables* set) {
    if (fl_status s = require(set != nullptr, "fl_observables_combine: set is NULL"); s != FL_OK)
        return s;
    return guarded([&] {
        combine_observables(set->set);
        return FL_OK;
    });
}

fl_status fl_observables_count(const fl_observables* set, const char* channel,
                               fl_counter_kind kind, double gate_s, fl_series** out) {
    if (fl_status s = require(set && channel && out, "fl_observables_count: NULL argument");
        s != FL_OK)
        return s;
    return guarded([&] {
        const PhaseSeries& phase = set->set.channel(channel);
        if (phase.size() == 0)
            throw std::invalid_argument(std::string("channel '") + channel +
                                        "' is empty (combine first?)");
        auto* handle = new fl_series{};
        handle->series = kind == FL_COUNTER_PI ? count_pi(phase, gate_s)
                                               : count_lambda(phase, gate_s);
        *out = handle;
        return FL_OK;
    });
}

size_t fl_series_length(const fl_series* series) {
    return series ? series->series.size() : 0;
}

double fl_series_gate(const fl_series* series) {
    return series ? series->series.gate_s : 0.0;
}

fl_status fl_series_values(const fl_series* series, double* out, size_t cap) {
    if (fl_status s = require(series && out, "fl_series_values: NULL argument"); s != FL_OK)
        return s;
    const size_t n = series->series.size() < cap ? series->series.size() : cap;
    std::memcpy(out, series->series.y.data(), n * sizeof(double));
    return FL_OK;
}

fl_status fl_series_validity(const fl_series* series, uint8_t* out, size_t cap) {
    if (fl_status s = require(series && out, "fl_series_validity: NULL argument"); s != FL_OK)
        return s;
    const size_t n = series->series.size() < cap ? series->series.size() : cap;
    for (size_t i = 0; i < n; ++i) out[i] = series->series.is_valid(i) ? 1 : 0;
    return FL_OK;
}

void fl_series_free(fl_series* series) { delete series; }

fl_status fl_series_stability(const fl_series* series, fl_estimator estimator, fl_curve** out) {
    if (fl_status s = require(series && out, "fl_series_stability: NULL argument"); s != FL_OK)
        return s;
    return guarded([&] {
        DeviationEstimator est = DeviationEstimator::Oadev;
        if (estimator == FL_ESTIMATOR_ADEV) est = DeviationEstimator::Adev;
        if (estimator == FL_ESTIMATOR_MDEV) est = DeviationEstimator::Mdev;
        auto* handle = new fl_curve{stability_deviation(series->series, est)};
        *out = handle;
        return FL_OK;
    });
}

size_t fl_curve_length(const fl_curve* curve) {
    return curve ? curve->curve.points.size() : 0;
}

fl_status fl_curve_point(const fl_curve* curve, size_t index, double* tau_s, double* dev,
                         double* ci_1sigma) {
    if (fl_status s = require(curve != nullptr, "fl_curve_point: curve is NULL"); s != FL_OK)
        return s;
    if (fl_status s = require(index < curve->curve.points.size(),
                              "fl_curve_point: index out of range");
        s != FL_OK)
        return s;
    const StabilityPoint& p = curve->curve.points[index];
    if (tau_s) *tau_s = p.tau_s;
    if (dev) *dev = p.dev;
    if (ci_1sigma) *ci_1sigma = p.ci_1sigma;
    return FL_OK;
}

void fl_curve_free(fl_curve* curve) { delete curve; }

fl_status fl_series_reciprocity(const fl_series* series, double tau_avg_s, double* mean,
                                double* uncertainty, int* consistent_with_zero, char* rendered,
                                size_t rendered_cap) {
    if (fl_status s = require(series != nullptr, "fl_series_reciprocity: series is NULL");
        s != FL_OK)
        return s;
    return guarded([&] {
        ReciprocityResult r = reciprocity_estimate(series->series, tau_avg_s);
        if (mean) *mean = r.mean;
        if (uncertainty) *uncertainty = r.uncertainty;
        if (consistent_with_zero) *consistent_with_zero = r.consistent_with_zero ? 1 : 0;
        if (rendered && rendered_cap > 0) {
            const size_t n = r.rendered.size() < rendered_cap - 1 ? r.rendered.size()
                                                                  : rendered_cap - 1;
            std::memcpy(rendered, r.rendered.c_str(), n);
            rendered[n] = '\0';
        }
        return FL_OK;
    });
}

fl_status fl_run_simulate(const char* config_path, const char* out_dir,
                          const uint64_t* seed_override) {
    if (fl_status s = require(config_path != nullptr, "fl_run_simulate: config_path is NULL");
        s != FL_OK)
        return s;
    return guarded([&] {
        CampaignConfig config = load_campaign_config(config_path);
        SimulateOptions options;
        if (seed_override) options.seed_override = *seed_override;
        const std::filesystem::path dir = out_dir ? out_dir : config.outputs;
        run_simulate(config, dir, options);
        return FL_OK;
    });
}

fl_status fl_run_analyze(const char* const* inputs, size_t n_inputs,
                         const char* const* analyses, size_t n_analyses, const char* out_dir,
                         const double* tau_avg_override, const char* config_path,
                         double deslip_sigma) {
    if (fl_status s = require(inputs && n_inputs > 0 && out_dir,
                              "fl_run_analyze: inputs and out_dir are required");
        s != FL_OK)
        return s;
    return guarded([&] {
        std::vector<std::filesystem::path> paths;
        for (size_t i = 0; i < n_inputs; ++i) paths.emplace_back(inputs[i]);
        AnalyzeOptions options;
        for (size_t i = 0; i < n_analyses; ++i) options.analyses.emplace_back(analyses[i]);
        if (tau_avg_override) options.tau_avg_s = *tau_avg_override;
        if (config_path) options.config_path = config_path;
        options.deslip_sigma = deslip_sigma;
        run_analyze(paths, out_dir, options);
        return FL_OK;
    });
}

fl_status fl_render_report(const char* analysis_dir, char** out_text) {
    if (fl_status s = require(analysis_dir && out_text, "fl_render_report: NULL argument");
        s != FL_OK)
        return s;
    return guarded([&] {
        *out_text = dup_string(render_report(analysis_dir));
        return FL_OK;
    });
}

void fl_string_free(char* text) { delete[] text; }

} // extern "C"
