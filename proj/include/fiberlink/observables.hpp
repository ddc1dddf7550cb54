#pragma once

#include "fiberlink/link.hpp"
#include "fiberlink/series.hpp"
#include "fiberlink/stats.hpp"

#include <span>
#include <string>

namespace fiberlink {

/// Fills the derived members of an observable set from the raw beat notes:
///   TWU1 = ANC - RT/2      TWB1 = OWB - RT/2
///   TWU2 = ANC - OWB       TWB2 = OWF - RT/2
///   TWU3 = ANC - OWF       TWB3 = (OWB - OWF)/2
///   TWNF = (OWB + OWF - RT)/2
/// A gap in any operand gaps the derived sample.
void combine_observables(ObservableSet& set);

/// Same algebra applied to counted fractional-frequency data.
struct CountedObservables {
    FrequencySeries twu1, twu2, twu3, twb1, twb2, twb3, twnf;
    const FrequencySeries& channel(const std::string& name) const;
};
CountedObservables combine_counted(const FrequencySeries& anc, const FrequencySeries& rt,
                                   const FrequencySeries& owb, const FrequencySeries& owf);

/// Predicted interferometric phase for every observable, given the link
/// geometry and a temperature-excursion series. TWB2 is the exact negative of
/// TWB1, TWB3 equals TWB1, and the TWNF entry is identically zero.
struct InterferometricLedger {
    PhaseSeries rt, owb, owf, twb1, twb2, twb3, twnf;
    const PhaseSeries& channel(const std::string& name) const;
    static const std::vector<std::string>& names();
};
InterferometricLedger predict_interferometric_ledger(const LinkConfig& config,
                                                     std::span<const double> delta_t_k,
                                                     double dt_s);

/// Mean fractional-frequency offset with its statistical uncertainty taken as
/// the larger of the overlapping ADEV and MDEV at the averaging time.
struct ReciprocityResult {
    double mean = 0.0;
    double oadev_at_tau = 0.0;
    double mdev_at_tau = 0.0;
    double uncertainty = 0.0; // max of the two deviations
    double tau_avg_s = 0.0;
    double sigma_multiplier = 1.0;
    bool consistent_with_zero = false;
    std::size_t n_used = 0;
    std::string rendered; // "3.1(+-3.9)x10^-20" style
};

ReciprocityResult reciprocity_estimate(const FrequencySeries& y, double tau_avg_s,
                                       double sigma_multiplier = 1.0);

} // namespace fiberlink
