#pragma once

#include "fiberlink/series.hpp"

#include <vector>

namespace fiberlink {

/// Dead-time-free Pi-type counter: unweighted phase difference over each
/// gate, y_k = [x((k+1) gate) - x(k gate)] / (2 pi nu gate). The gate must be
/// an integer multiple of the phase step. A gate is valid only if every phase
/// sample it spans is valid.
FrequencySeries count_pi(const PhaseSeries& phase, double gate_s);

/// Dead-time-free Lambda-type counter: difference of adjacent boxcar phase
/// means (triangular frequency weighting), one output sample per gate. The
/// first output row cannot be formed and is emitted as a gap so that Pi and
/// Lambda records stay row-aligned.
FrequencySeries count_lambda(const PhaseSeries& phase, double gate_s);

struct SlipScan {
    std::vector<std::size_t> flagged;
    FrequencySeries cleaned; // flagged samples converted to gaps
};

/// Flags samples deviating from a robust local median by more than
/// threshold_sigma robust deviations (scaled MAD) and gaps them out.
/// Needs at least 100 samples for a usable scale estimate.
SlipScan detect_cycle_slips(const FrequencySeries& y, double threshold_sigma);

} // namespace fiberlink
