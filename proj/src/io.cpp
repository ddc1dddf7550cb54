#include "fiberlink/io.hpp"

#include "fiberlink/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace fiberlink {

using nlohmann::json;

const std::vector<std::string> kKnownAnalyses = {"stability", "psd",         "accuracy",
                                                 "reciprocity", "correlation", "ledger"};

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Strict config parsing: every violation is collected and reported at once,
// unknown keys are rejected with their location.
// ---------------------------------------------------------------------------

struct ConfigReader {
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) {
        errors.push_back(path + ": " + msg);
    }

    void check_unknown(const json& obj, const std::string& path,
                       const std::vector<std::string>& known) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::find(known.begin(), known.end(), it.key()) == known.end())
                fail(path + "." + it.key(), "unknown field");
        }
    }

    double number(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(path + "." + key, "expected a number");
            return fallback;
        }
        return v.get<double>();
    }

    long long integer(const json& obj, const std::string& path, const std::string& key,
                      long long fallback) {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(path + "." + key, "expected an integer");
            return fallback;
        }
        return v.get<long long>();
    }

    std::string text(const json& obj, const std::string& path, const std::string& key,
                     const std::string& fallback) {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_string()) {
            fail(path + "." + key, "expected a string");
            return fallback;
        }
        return v.get<std::string>();
    }

    NoiseSpec noise_spec(const json& obj, const std::string& path, double carrier_hz) {
        NoiseSpec spec;
        spec.carrier_hz = carrier_hz;
        spec.terms.clear();
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return spec;
        }
        check_unknown(obj, path, {"terms", "cutoff_hz"});
        spec.cutoff_hz = number(obj, path, "cutoff_hz", 0.0);
        if (obj.contains("terms")) {
            const json& terms = obj.at("terms");
            if (!terms.is_array()) {
                fail(path + ".terms", "expected an array");
                return spec;
            }
            for (std::size_t i = 0; i < terms.size(); ++i) {
                const std::string tpath = path + ".terms[" + std::to_string(i) + "]";
                const json& t = terms.at(i);
                if (!t.is_object()) {
                    fail(tpath, "expected an object");
                    continue;
                }
                check_unknown(t, tpath, {"alpha", "level_rad2_hz"});
                NoiseTerm term;
                term.alpha = static_cast<int>(integer(t, tpath, "alpha", 0));
                term.level_rad2_hz = number(t, tpath, "level_rad2_hz", 0.0);
                if (term.alpha > 0 || term.alpha < -4)
                    fail(tpath + ".alpha", "must lie in {0,-1,-2,-3,-4}");
                if (!(term.level_rad2_hz >= 0.0))
                    fail(tpath + ".level_rad2_hz", "must be >= 0");
                spec.terms.push_back(term);
            }
        }
        return spec;
    }

    TemperatureProcess temperature(const json& obj, const std::string& path) {
        TemperatureProcess proc;
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return proc;
        }
        check_unknown(obj, path,
                      {"mean_k", "diurnal_amplitude_k", "diurnal_period_s",
                       "linear_drift_k_per_s", "random_walk_level_k2_hz"});
        proc.mean_k = number(obj, path, "mean_k", proc.mean_k);
        proc.diurnal_amplitude_k = number(obj, path, "diurnal_amplitude_k", 0.0);
        proc.diurnal_period_s = number(obj, path, "diurnal_period_s", proc.diurnal_period_s);
        proc.linear_drift_k_per_s = number(obj, path, "linear_drift_k_per_s", 0.0);
        proc.random_walk_level_k2_hz = number(obj, path, "random_walk_level_k2_hz", 0.0);
        return proc;
    }

    AncServoConfig servo(const json& obj, const std::string& path) {
        AncServoConfig cfg;
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return cfg;
        }
        check_unknown(obj, path, {"mode", "bandwidth_hz"});
        const std::string mode = text(obj, path, "mode", "ideal");
        if (mode == "ideal") cfg.mode = AncServoConfig::Mode::Ideal;
        else if (mode == "delayed_loop") cfg.mode = AncServoConfig::Mode::DelayedLoop;
        else fail(path + ".mode", "expected 'ideal' or 'delayed_loop'");
        cfg.bandwidth_hz = number(obj, path, "bandwidth_hz", cfg.bandwidth_hz);
        return cfg;
    }

    LinkConfig link(const json& obj, const std::string& path) {
        LinkConfig cfg;
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return cfg;
        }
        check_unknown(obj, path,
                      {"length_km", "group_index", "tau_s", "carrier_hz", "gamma_fs_per_k_m",
                       "l_bc_m", "l_oa_m", "l_ob_m", "anc_mismatch_m", "fiber_noise",
                       "interfiber_rho", "detection_floor", "detection_floor_owf", "temperature",
                       "nonreciprocal_offset", "laser_residual", "rf_residual", "anc_servo"});
        cfg.length_km = number(obj, path, "length_km", cfg.length_km);
        cfg.group_index = number(obj, path, "group_index", cfg.group_index);
        cfg.tau_s = number(obj, path, "tau_s", 0.0);
        cfg.carrier_hz = number(obj, path, "carrier_hz", cfg.carrier_hz);
        cfg.gamma_fs_per_k_m = number(obj, path, "gamma_fs_per_k_m", cfg.gamma_fs_per_k_m);
        cfg.l_bc_m = number(obj, path, "l_bc_m", cfg.l_bc_m);
        cfg.l_oa_m = number(obj, path, "l_oa_m", cfg.l_oa_m);
        cfg.l_ob_m = number(obj, path, "l_ob_m", cfg.l_ob_m);
        cfg.anc_mismatch_m = number(obj, path, "anc_mismatch_m", 0.0);
        cfg.interfiber_rho = number(obj, path, "interfiber_rho", cfg.interfiber_rho);
        cfg.nonreciprocal_offset = number(obj, path, "nonreciprocal_offset", 0.0);
        if (obj.contains("fiber_noise"))
            cfg.fiber_noise = noise_spec(obj.at("fiber_noise"), path + ".fiber_noise",
                                         cfg.carrier_hz);
        if (obj.contains("detection_floor"))
            cfg.detection_floor = noise_spec(obj.at("detection_floor"),
                                             path + ".detection_floor", cfg.carrier_hz);
        if (obj.contains("detection_floor_owf"))
            cfg.detection_floor_owf = noise_spec(obj.at("detection_floor_owf"),
                                                 path + ".detection_floor_owf", cfg.carrier_hz);
        if (obj.contains("temperature"))
            cfg.temperature = temperature(obj.at("temperature"), path + ".temperature");
        if (obj.contains("laser_residual"))
            cfg.laser_residual = noise_spec(obj.at("laser_residual"), path + ".laser_residual",
                                            cfg.carrier_hz);
        if (obj.contains("rf_residual"))
            cfg.rf_residual = noise_spec(obj.at("rf_residual"), path + ".rf_residual",
                                         cfg.carrier_hz);
        if (obj.contains("anc_servo")) cfg.anc = servo(obj.at("anc_servo"), path + ".anc_servo");
        cfg.fiber_noise.carrier_hz = cfg.carrier_hz;
        cfg.detection_floor.carrier_hz = cfg.carrier_hz;
        return cfg;
    }

    CampaignConfig campaign(const json& obj) {
        CampaignConfig cfg;
        if (!obj.is_object()) {
            fail("config", "top level must be an object");
            return cfg;
        }
        check_unknown(obj, "config",
                      {"link", "duration_s", "internal_rate_hz", "gate_s", "seeds", "outputs",
                       "analyses", "start_mjd", "start_sod_s", "tau_avg_s"});
        if (obj.contains("link")) cfg.link = link(obj.at("link"), "config.link");
        cfg.duration_s = number(obj, "config", "duration_s", cfg.duration_s);
        cfg.internal_rate_hz = number(obj, "config", "internal_rate_hz", cfg.internal_rate_hz);
        cfg.gate_s = number(obj, "config", "gate_s", cfg.gate_s);
        cfg.start_mjd = integer(obj, "config", "start_mjd", cfg.start_mjd);
        cfg.start_sod_s = number(obj, "config", "start_sod_s", cfg.start_sod_s);
        if (obj.contains("tau_avg_s")) {
            const json& v = obj.at("tau_avg_s");
            if (!v.is_number()) fail("config.tau_avg_s", "expected a number");
            else cfg.tau_avg_s = v.get<double>();
        }
        if (obj.contains("seeds")) {
            const json& seeds = obj.at("seeds");
            if (!seeds.is_array()) {
                fail("config.seeds", "expected an array");
            } else {
                cfg.seeds.clear();
                for (std::size_t i = 0; i < seeds.size(); ++i) {
                    const json& s = seeds.at(i);
                    if (!s.is_number_integer() || s.get<long long>() < 0)
                        fail("config.seeds[" + std::to_string(i) + "]",
                             "expected a non-negative integer");
                    else cfg.seeds.push_back(s.get<std::uint64_t>());
                }
            }
        }
        cfg.outputs = text(obj, "config", "outputs", cfg.outputs);
        if (obj.contains("analyses")) {
            const json& a = obj.at("analyses");
            if (!a.is_array()) {
                fail("config.analyses", "expected an array");
            } else {
                cfg.analyses.clear();
                for (std::size_t i = 0; i < a.size(); ++i) {
                    const json& v = a.at(i);
                    if (!v.is_string())
                        fail("config.analyses[" + std::to_string(i) + "]", "expected a string");
                    else cfg.analyses.push_back(v.get<std::string>());
                }
            }
        }
        return cfg;
    }
};

json noise_spec_to_json(const NoiseSpec& spec) {
    json terms = json::array();
    for (const auto& t : spec.terms)
        terms.push_back({{"alpha", t.alpha}, {"level_rad2_hz", t.level_rad2_hz}});
    return {{"terms", terms}, {"cutoff_hz", spec.cutoff_hz}};
}

json campaign_to_json_obj(const CampaignConfig& c) {
    const LinkConfig& l = c.link;
    json link = {
        {"length_km", l.length_km},
        {"group_index", l.group_index},
        {"tau_s", l.tau_s},
        {"carrier_hz", l.carrier_hz},
        {"gamma_fs_per_k_m", l.gamma_fs_per_k_m},
        {"l_bc_m", l.l_bc_m},
        {"l_oa_m", l.l_oa_m},
        {"l_ob_m", l.l_ob_m},
        {"anc_mismatch_m", l.anc_mismatch_m},
        {"fiber_noise", noise_spec_to_json(l.fiber_noise)},
        {"interfiber_rho", l.interfiber_rho},
        {"detection_floor", noise_spec_to_json(l.detection_floor)},
        {"temperature",
         {{"mean_k", l.temperature.mean_k},
          {"diurnal_amplitude_k", l.temperature.diurnal_amplitude_k},
          {"diurnal_period_s", l.temperature.diurnal_period_s},
          {"linear_drift_k_per_s", l.temperature.linear_drift_k_per_s},
          {"random_walk_level_k2_hz", l.temperature.random_walk_level_k2_hz}}},
        {"nonreciprocal_offset", l.nonreciprocal_offset},
        {"laser_residual", noise_spec_to_json(l.laser_residual)},
        {"rf_residual", noise_spec_to_json(l.rf_residual)},
        {"anc_servo", {{"mode", to_string(l.anc.mode)}, {"bandwidth_hz", l.anc.bandwidth_hz}}},
    };
    if (l.detection_floor_owf)
        link["detection_floor_owf"] = noise_spec_to_json(*l.detection_floor_owf);
    json out = {
        {"link", link},
        {"duration_s", c.duration_s},
        {"internal_rate_hz", c.internal_rate_hz},
        {"gate_s", c.gate_s},
        {"seeds", c.seeds},
        {"outputs", c.outputs},
        {"analyses", c.analyses},
        {"start_mjd", c.start_mjd},
        {"start_sod_s", c.start_sod_s},
    };
    if (c.tau_avg_s) out["tau_avg_s"] = *c.tau_avg_s;
    return out;
}

} // namespace

void CampaignConfig::validate() const {
    std::vector<std::string> problems;
    try {
        link.validate();
    } catch (const config_error& e) {
        problems.push_back(e.what());
    }
    if (seeds.empty()) problems.push_back("config.seeds: at least one seed is required");
    if (!(duration_s > 0.0)) problems.push_back("config.duration_s: must be positive");
    if (!(internal_rate_hz > 0.0)) problems.push_back("config.internal_rate_hz: must be positive");
    if (!(gate_s > 0.0)) {
        problems.push_back("config.gate_s: must be positive");
    } else {
        const double gates = duration_s / gate_s;
        if (std::abs(gates - std::round(gates)) > 1e-9 * gates)
            problems.push_back("config.gate_s: gate must divide the duration");
        const double per_gate = gate_s * internal_rate_hz;
        if (std::abs(per_gate - std::round(per_gate)) > 1e-9 * per_gate || per_gate < 2.0)
            problems.push_back(
                "config.gate_s: gate must span an integer number of internal samples, at "
                "least 2 (the lambda counter averages within the gate)");
    }
    if (analyses.empty()) problems.push_back("config.analyses: must not be empty");
    for (const auto& a : analyses)
        if (std::find(kKnownAnalyses.begin(), kKnownAnalyses.end(), a) == kKnownAnalyses.end())
            problems.push_back("config.analyses: unknown analysis '" + a + "'");
    if (tau_avg_s && !(*tau_avg_s > 0.0))
        problems.push_back("config.tau_avg_s: must be positive");
    if (!problems.empty()) {
        std::string joined;
        for (const auto& p : problems) {
            if (!joined.empty()) joined += "\n  ";
            joined += p;
        }
        throw config_error("invalid configuration:\n  " + joined);
    }
}

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_campaign_config(ss.str());
    } catch (const config_error& e) {
        throw config_error(path.string() + ": " + e.what());
    }
}

CampaignConfig parse_campaign_config(const std::string& json_text) {
    json parsed;
    try {
        parsed = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("JSON parse error: ") + e.what());
    }
    ConfigReader reader;
    CampaignConfig cfg = reader.campaign(parsed);
    if (!reader.errors.empty()) {
        std::string joined;
        for (const auto& p : reader.errors) {
            if (!joined.empty()) joined += "\n  ";
            joined += p;
        }
        throw config_error("invalid configuration:\n  " + joined);
    }
    cfg.validate();
    return cfg;
}

std::string campaign_config_to_json(const CampaignConfig& config) {
    return campaign_to_json_obj(config).dump(2) + "\n";
}

std::string config_hash(const CampaignConfig& config) {
    const std::string canonical = campaign_to_json_obj(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

// ---------------------------------------------------------------------------
// Counter files
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMagicPrefix = "#fiberlink-counter v";
constexpr int kFormatVersion = 1;

} // namespace

std::size_t CounterFile::channel_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.channels.size(); ++i)
        if (header.channels[i] == name) return i;
    throw data_error("counter file has no channel '" + name + "'");
}

FrequencySeries CounterFile::channel(const std::string& name) const {
    const std::size_t ch = channel_index(name);
    FrequencySeries out;
    out.t0_s = t_s.empty() ? 0.0 : t_s.front();
    out.gate_s = header.gate_s;
    out.carrier_hz = header.carrier_hz;
    out.kind = header.kind;
    out.y = values[ch];
    out.valid.assign(rows(), 1);
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << ch);
    bool any_gap = false;
    for (std::size_t r = 0; r < rows(); ++r) {
        if (!(valid_mask[r] & bit)) {
            out.valid[r] = 0;
            out.y[r] = std::numeric_limits<double>::quiet_NaN();
            any_gap = true;
        }
    }
    if (!any_gap) out.valid.clear();
    return out;
}

void CounterFile::set_channel_gaps(std::size_t channel, const std::vector<std::uint8_t>& valid,
                                   bool slip_provenance) {
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << channel);
    for (std::size_t r = 0; r < rows() && r < valid.size(); ++r) {
        if (!valid[r]) {
            if (valid_mask[r] & bit) {
                valid_mask[r] = static_cast<std::uint8_t>(valid_mask[r] & ~bit);
                if (slip_provenance)
                    slip_mask[r] = static_cast<std::uint8_t>(slip_mask[r] | bit);
                values[channel][r] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
}

CounterFile CounterFile::from_series(const CounterFileHeader& header,
                                     const std::vector<FrequencySeries>& series) {
    if (series.empty() || series.size() != header.channels.size())
        throw std::invalid_argument("CounterFile::from_series: channel count mismatch");
    if (series.size() > 4)
        throw std::invalid_argument("CounterFile::from_series: at most 4 channels supported");
    const std::size_t n = series.front().size();
    for (const auto& s : series)
        if (s.size() != n || s.gate_s != header.gate_s)
            throw std::invalid_argument("CounterFile::from_series: misaligned series");

    CounterFile file;
    file.header = header;
    file.header.version = kFormatVersion;
    file.t_s.resize(n);
    file.valid_mask.assign(n, 0);
    file.slip_mask.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r)
        file.t_s[r] = series.front().t0_s + static_cast<double>(r) * header.gate_s;
    file.values.resize(series.size());
    for (std::size_t ch = 0; ch < series.size(); ++ch) {
        file.values[ch] = series[ch].y;
        const std::uint8_t bit = static_cast<std::uint8_t>(1u << ch);
        for (std::size_t r = 0; r < n; ++r)
            if (series[ch].is_valid(r))
                file.valid_mask[r] = static_cast<std::uint8_t>(file.valid_mask[r] | bit);
    }
    return file;
}

CounterFile read_counter_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open counter file: " + path.string());

    CounterFile file;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw data_error(path.string() + ": empty file");
    ++line_no;
    if (line.rfind(kMagicPrefix, 0) != 0)
        throw data_error(path.string() + ": not a counter file (bad magic line)");
    const int version = std::atoi(line.c_str() + std::strlen(kMagicPrefix));
    if (version != kFormatVersion)
        throw data_error(path.string() + ": format version mismatch: found v" +
                         std::to_string(version) + ", expected v" +
                         std::to_string(kFormatVersion));
    file.header.version = version;

    bool header_done = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line == "#end-header") {
            header_done = true;
            break;
        }
        if (line.rfind("# ", 0) != 0)
            throw data_error(path.string() + ": line " + std::to_string(line_no) +
                             ": expected header line");
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw data_error(path.string() + ": line " + std::to_string(line_no) +
                             ": malformed header line");
        const std::string key = line.substr(2, eq - 2);
        const std::string value = line.substr(eq + 3);
        if (key == "carrier_hz") file.header.carrier_hz = std::strtod(value.c_str(), nullptr);
        else if (key == "gate_s") file.header.gate_s = std::strtod(value.c_str(), nullptr);
        else if (key == "kind") file.header.kind = counter_kind_from_string(value);
        else if (key == "channels") {
            std::istringstream ss(value);
            std::string ch;
            while (ss >> ch) file.header.channels.push_back(ch);
        } else if (key == "start_mjd") file.header.start_mjd = std::atoll(value.c_str());
        else if (key == "start_sod_s") file.header.start_sod_s = std::strtod(value.c_str(), nullptr);
        else if (key == "config_hash") file.header.config_hash = value;
        else if (key == "seed") file.header.seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "internal_rate_hz")
            file.header.internal_rate_hz = std::strtod(value.c_str(), nullptr);
        else file.header.extra.emplace_back(key, value);
    }
    if (!header_done) throw data_error(path.string() + ": missing #end-header");
    if (file.header.channels.empty())
        throw data_error(path.string() + ": header declares no channels");
    if (!(file.header.carrier_hz > 0.0))
        throw data_error(path.string() + ": header carrier must be positive");
    const std::size_t n_ch = file.header.channels.size();
    file.values.resize(n_ch);

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const double t = std::strtod(p, &end);
        if (end == p)
            throw data_error(path.string() + ": line " + std::to_string(line_no) +
                             ": malformed row (bad timestamp)");
        p = end;
        double vals[4] = {0, 0, 0, 0};
        for (std::size_t ch = 0; ch < n_ch; ++ch) {
            vals[ch] = std::strtod(p, &end);
            if (end == p)
                throw data_error(path.string() + ": line " + std::to_string(line_no) +
                                 ": malformed row (missing value for channel " +
                                 file.header.channels[ch] + ")");
            p = end;
        }
        while (*p == ' ' || *p == '\t') ++p;
        if (!std::isxdigit(static_cast<unsigned char>(p[0])) ||
            !std::isxdigit(static_cast<unsigned char>(p[1])))
            throw data_error(path.string() + ": line " + std::to_string(line_no) +
                             ": malformed row (missing flags)");
        const auto flags = static_cast<unsigned>(std::strtoul(p, &end, 16));

        if (!file.t_s.empty()) {
            const double prev = file.t_s.back();
            if (!(t > prev))
                throw data_error(path.string() + ": line " + std::to_string(line_no) +
                                 ": non-monotonic timestamp");
            if (std::abs((t - prev) - file.header.gate_s) > 1e-6 * file.header.gate_s)
                throw data_error(path.string() + ": line " + std::to_string(line_no) +
                                 ": timestamp not at gate spacing");
        }
        file.t_s.push_back(t);
        file.valid_mask.push_back(static_cast<std::uint8_t>(flags & 0x0f));
        file.slip_mask.push_back(static_cast<std::uint8_t>((flags >> 4) & 0x0f));
        for (std::size_t ch = 0; ch < n_ch; ++ch) file.values[ch].push_back(vals[ch]);
    }
    return file;
}

void write_counter_file(const std::filesystem::path& path, const CounterFile& file) {
    const std::size_t n_ch = file.header.channels.size();
    if (n_ch == 0 || n_ch > 4)
        throw std::invalid_argument("write_counter_file: need 1..4 channels");

    std::string out;
    out.reserve(file.rows() * 32 * (n_ch + 2) + 512);
    out += kMagicPrefix + std::to_string(kFormatVersion) + "\n";
    out += "# carrier_hz = " + fmt17(file.header.carrier_hz) + "\n";
    out += "# gate_s = " + fmt17(file.header.gate_s) + "\n";
    out += "# kind = " + to_string(file.header.kind) + "\n";
    out += "# channels =";
    for (const auto& ch : file.header.channels) out += " " + ch;
    out += "\n";
    out += "# start_mjd = " + std::to_string(file.header.start_mjd) + "\n";
    out += "# start_sod_s = " + fmt17(file.header.start_sod_s) + "\n";
    out += "# config_hash = " + file.header.config_hash + "\n";
    out += "# seed = " + std::to_string(file.header.seed) + "\n";
    out += "# internal_rate_hz = " + fmt17(file.header.internal_rate_hz) + "\n";
    for (const auto& [k, v] : file.header.extra) out += "# " + k + " = " + v + "\n";
    out += "#end-header\n";

    char buf[48];
    for (std::size_t r = 0; r < file.rows(); ++r) {
        out += fmt17(file.t_s[r]);
        for (std::size_t ch = 0; ch < n_ch; ++ch) {
            const bool ok = (file.valid_mask[r] >> ch) & 1u;
            out += ' ';
            out += ok ? fmt17(file.values[ch][r]) : "nan";
        }
        std::snprintf(buf, sizeof buf, " %02X\n",
                      (static_cast<unsigned>(file.slip_mask[r]) << 4) |
                          static_cast<unsigned>(file.valid_mask[r]));
        out += buf;
    }
    write_text_file(path, out);
}

void write_provenance_sidecar(const std::filesystem::path& path, const CampaignConfig& config,
                              std::uint64_t seed, const std::vector<std::string>& warnings) {
    json obj = {
        {"format", "fiberlink-provenance v1"},
        {"config", campaign_to_json_obj(config)},
        {"config_hash", config_hash(config)},
        {"seed", seed},
        {"warnings", warnings},
    };
    write_text_file(path, obj.dump(2) + "\n");
}

std::optional<SidecarData> read_provenance_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    json obj;
    try {
        obj = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw data_error(path.string() + ": malformed provenance sidecar: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("config"))
        throw data_error(path.string() + ": provenance sidecar has no config");
    SidecarData data;
    data.config = parse_campaign_config(obj.at("config").dump());
    data.seed = obj.value("seed", 0ull);
    data.config_hash = obj.value("config_hash", std::string{});
    return data;
}

void write_columns(const std::filesystem::path& path, const std::string& header_comment,
                   const std::vector<std::string>& column_names,
                   const std::vector<std::vector<double>>& columns) {
    if (columns.empty() || columns.size() != column_names.size())
        throw std::invalid_argument("write_columns: column/name mismatch");
    const std::size_t rows = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("write_columns: ragged columns");

    std::string out;
    if (!header_comment.empty()) out += "# " + header_comment + "\n";
    out += "# columns:";
    for (const auto& n : column_names) out += " " + n;
    out += "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ' ';
            out += fmt17(columns[c][r]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed for " + path.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fiberlink
