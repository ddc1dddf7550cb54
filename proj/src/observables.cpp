#include "fiberlink/observables.hpp"

#include "fiberlink/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fiberlink {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_aligned(const PhaseSeries& a, const PhaseSeries& b, const char* what) {
    if (a.size() != b.size() || a.dt_s != b.dt_s || a.t0_s != b.t0_s)
        throw std::invalid_argument(std::string("combine_observables: misaligned series: ") + what);
}

// Generic elementwise combination with gap propagation. The coefficient set
// is (ca, cb, cc) applied to up to three operands.
template <typename Get, typename Valid>
void combine_into(std::vector<double>& out, std::vector<std::uint8_t>& out_valid, std::size_t n,
                  Get&& get, Valid&& valid_at) {
    out.resize(n);
    bool any_gap = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (valid_at(i)) {
            out[i] = get(i);
        } else {
            out[i] = kNan;
            any_gap = true;
        }
    }
    if (any_gap) {
        out_valid.assign(n, 1);
        for (std::size_t i = 0; i < n; ++i)
            if (std::isnan(out[i])) out_valid[i] = 0;
    } else {
        out_valid.clear();
    }
}

} // namespace

void combine_observables(ObservableSet& set) {
    const PhaseSeries& anc = set.anc;
    const PhaseSeries& rt = set.rt;
    const PhaseSeries& owb = set.owb;
    const PhaseSeries& owf = set.owf;
    if (anc.size() == 0)
        throw std::invalid_argument("combine_observables: raw members are empty");
    check_aligned(anc, rt, "ANC vs RT");
    check_aligned(anc, owb, "ANC vs OWB");
    check_aligned(anc, owf, "ANC vs OWF");
    const std::size_t n = anc.size();

    auto meta = [&](PhaseSeries& s) {
        s.t0_s = anc.t0_s;
        s.dt_s = anc.dt_s;
        s.carrier_hz = anc.carrier_hz;
    };
    meta(set.twu1);
    meta(set.twu2);
    meta(set.twu3);
    meta(set.twb1);
    meta(set.twb2);
    meta(set.twb3);
    meta(set.twnf);

    combine_into(set.twu1.phase_rad, set.twu1.valid, n,
                 [&](std::size_t i) { return anc.phase_rad[i] - 0.5 * rt.phase_rad[i]; },
                 [&](std::size_t i) { return anc.is_valid(i) && rt.is_valid(i); });
    combine_into(set.twu2.phase_rad, set.twu2.valid, n,
                 [&](std::size_t i) { return anc.phase_rad[i] - owb.phase_rad[i]; },
                 [&](std::size_t i) { return anc.is_valid(i) && owb.is_valid(i); });
    combine_into(set.twu3.phase_rad, set.twu3.valid, n,
                 [&](std::size_t i) { return anc.phase_rad[i] - owf.phase_rad[i]; },
                 [&](std::size_t i) { return anc.is_valid(i) && owf.is_valid(i); });
    combine_into(set.twb1.phase_rad, set.twb1.valid, n,
                 [&](std::size_t i) { return owb.phase_rad[i] - 0.5 * rt.phase_rad[i]; },
                 [&](std::size_t i) { return owb.is_valid(i) && rt.is_valid(i); });
    combine_into(set.twb2.phase_rad, set.twb2.valid, n,
                 [&](std::size_t i) { return owf.phase_rad[i] - 0.5 * rt.phase_rad[i]; },
                 [&](std::size_t i) { return owf.is_valid(i) && rt.is_valid(i); });
    combine_into(set.twb3.phase_rad, set.twb3.valid, n,
                 [&](std::size_t i) { return 0.5 * (owb.phase_rad[i] - owf.phase_rad[i]); },
                 [&](std::size_t i) { return owb.is_valid(i) && owf.is_valid(i); });
    combine_into(
        set.twnf.phase_rad, set.twnf.valid, n,
        [&](std::size_t i) {
            return 0.5 * (owb.phase_rad[i] + owf.phase_rad[i] - rt.phase_rad[i]);
        },
        [&](std::size_t i) { return owb.is_valid(i) && owf.is_valid(i) && rt.is_valid(i); });
}

const FrequencySeries& CountedObservables::channel(const std::string& name) const {
    if (name == "TWU1") return twu1;
    if (name == "TWU2") return twu2;
    if (name == "TWU3") return twu3;
    if (name == "TWB1") return twb1;
    if (name == "TWB2") return twb2;
    if (name == "TWB3") return twb3;
    if (name == "TWNF") return twnf;
    throw std::invalid_argument("unknown derived observable '" + name + "'");
}

CountedObservables combine_counted(const FrequencySeries& anc, const FrequencySeries& rt,
                                   const FrequencySeries& owb, const FrequencySeries& owf) {
    const std::size_t n = anc.size();
    for (const FrequencySeries* s : {&rt, &owb, &owf})
        if (s->size() != n || s->gate_s != anc.gate_s)
            throw std::invalid_argument("combine_counted: misaligned counter series");

    CountedObservables out;
    auto init = [&](FrequencySeries& s) {
        s.t0_s = anc.t0_s;
        s.gate_s = anc.gate_s;
        s.carrier_hz = anc.carrier_hz;
        s.kind = anc.kind;
    };
    init(out.twu1);
    init(out.twu2);
    init(out.twu3);
    init(out.twb1);
    init(out.twb2);
    init(out.twb3);
    init(out.twnf);

    combine_into(out.twu1.y, out.twu1.valid, n,
                 [&](std::size_t i) { return anc.y[i] - 0.5 * rt.y[i]; },
                 [&](std::size_t i) { return anc.is_valid(i) && rt.is_valid(i); });
    combine_into(out.twu2.y, out.twu2.valid, n,
                 [&](std::size_t i) { return anc.y[i] - owb.y[i]; },
                 [&](std::size_t i) { return anc.is_valid(i) && owb.is_valid(i); });
    combine_into(out.twu3.y, out.twu3.valid, n,
                 [&](std::size_t i) { return anc.y[i] - owf.y[i]; },
                 [&](std::size_t i) { return anc.is_valid(i) && owf.is_valid(i); });
    combine_into(out.twb1.y, out.twb1.valid, n,
                 [&](std::size_t i) { return owb.y[i] - 0.5 * rt.y[i]; },
                 [&](std::size_t i) { return owb.is_valid(i) && rt.is_valid(i); });
    combine_into(out.twb2.y, out.twb2.valid, n,
                 [&](std::size_t i) { return owf.y[i] - 0.5 * rt.y[i]; },
                 [&](std::size_t i) { return owf.is_valid(i) && rt.is_valid(i); });
    combine_into(out.twb3.y, out.twb3.valid, n,
                 [&](std::size_t i) { return 0.5 * (owb.y[i] - owf.y[i]); },
                 [&](std::size_t i) { return owb.is_valid(i) && owf.is_valid(i); });
    combine_into(out.twnf.y, out.twnf.valid, n,
                 [&](std::size_t i) { return 0.5 * (owb.y[i] + owf.y[i] - rt.y[i]); },
                 [&](std::size_t i) {
                     return owb.is_valid(i) && owf.is_valid(i) && rt.is_valid(i);
                 });
    return out;
}

const PhaseSeries& InterferometricLedger::channel(const std::string& name) const {
    if (name == "RT") return rt;
    if (name == "OWB") return owb;
    if (name == "OWF") return owf;
    if (name == "TWB1") return twb1;
    if (name == "TWB2") return twb2;
    if (name == "TWB3") return twb3;
    if (name == "TWNF") return twnf;
    throw std::invalid_argument("unknown ledger entry '" + name + "'");
}

const std::vector<std::string>& InterferometricLedger::names() {
    static const std::vector<std::string> n = {"RT", "OWB", "OWF", "TWB1", "TWB2", "TWB3", "TWNF"};
    return n;
}

InterferometricLedger predict_interferometric_ledger(const LinkConfig& config,
                                                     std::span<const double> delta_t_k,
                                                     double dt_s) {
    if (delta_t_k.empty())
        throw std::invalid_argument("predict_interferometric_ledger: empty temperature series");

    InterferometricLedger ledger;
    const double nu = config.carrier_hz;
    const double gamma = config.gamma_fs_per_k_m;
    ledger.rt = interferometric_phase(nu, gamma, delta_t_k, dt_s, 2.0 * config.l_bc_m);
    ledger.owb = interferometric_phase(nu, gamma, delta_t_k, dt_s,
                                       2.0 * config.l_bc_m + config.l_oa_m - config.l_ob_m);
    ledger.owf = interferometric_phase(nu, gamma, delta_t_k, dt_s,
                                       config.l_ob_m - config.l_oa_m);
    ledger.twb1 = interferometric_phase(nu, gamma, delta_t_k, dt_s, config.mismatch_m());

    // TWB2 = -TWB1 and TWB3 = TWB1, enforced exactly; the noise-floor
    // combination cancels the interferometric term identically.
    ledger.twb2 = ledger.twb1;
    for (auto& v : ledger.twb2.phase_rad) v = -v;
    ledger.twb3 = ledger.twb1;
    ledger.twnf = ledger.twb1;
    for (auto& v : ledger.twnf.phase_rad) v = 0.0;
    return ledger;
}

ReciprocityResult reciprocity_estimate(const FrequencySeries& y, double tau_avg_s,
                                       double sigma_multiplier) {
    if (!(tau_avg_s > 0.0))
        throw std::invalid_argument("reciprocity_estimate: tau_avg must be positive");
    if (y.duration_s() < 4.0 * tau_avg_s * (1.0 - 1e-9))
        throw std::invalid_argument("reciprocity_estimate: record shorter than 4 * tau_avg");
    if (y.gap_fraction() > 0.5)
        throw std::invalid_argument("reciprocity_estimate: more than 50% of samples are gaps");

    ReciprocityResult r;
    r.tau_avg_s = tau_avg_s;
    r.sigma_multiplier = sigma_multiplier;
    r.mean = mean_valid(y);
    r.n_used = y.valid_count();

    auto oa = deviation_at(y, DeviationEstimator::Oadev, tau_avg_s);
    auto md = deviation_at(y, DeviationEstimator::Mdev, tau_avg_s);
    if (!oa || !md)
        throw std::invalid_argument(
            "reciprocity_estimate: not enough differences at the averaging time");
    r.oadev_at_tau = oa->dev;
    r.mdev_at_tau = md->dev;
    // Conservative: the larger of the two deviations is the uncertainty.
    r.uncertainty = std::max(r.oadev_at_tau, r.mdev_at_tau);
    r.consistent_with_zero = std::abs(r.mean) <= sigma_multiplier * r.uncertainty;
    r.rendered = format_value_pm(r.mean, sigma_multiplier * r.uncertainty);
    return r;
}

} // namespace fiberlink
