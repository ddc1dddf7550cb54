#include "fiberlink/series.hpp"

#include "fiberlink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fiberlink {

std::string to_string(CounterKind k) {
    return k == CounterKind::Pi ? "pi" : "lambda";
}

CounterKind counter_kind_from_string(const std::string& s) {
    if (s == "pi" || s == "Pi" || s == "PI") return CounterKind::Pi;
    if (s == "lambda" || s == "Lambda" || s == "LAMBDA") return CounterKind::Lambda;
    throw data_error("unknown counter kind '" + s + "' (expected pi or lambda)");
}

bool PhaseSeries::has_gaps() const {
    if (valid.empty()) return false;
    return std::any_of(valid.begin(), valid.end(), [](std::uint8_t v) { return v == 0; });
}

void PhaseSeries::mark_invalid(std::size_t i) {
    if (valid.empty()) valid.assign(phase_rad.size(), 1);
    valid[i] = 0;
    phase_rad[i] = std::numeric_limits<double>::quiet_NaN();
}

bool FrequencySeries::has_gaps() const {
    if (valid.empty()) return false;
    return std::any_of(valid.begin(), valid.end(), [](std::uint8_t v) { return v == 0; });
}

void FrequencySeries::mark_invalid(std::size_t i) {
    if (valid.empty()) valid.assign(y.size(), 1);
    valid[i] = 0;
    y[i] = std::numeric_limits<double>::quiet_NaN();
}

std::size_t FrequencySeries::valid_count() const {
    if (valid.empty()) return y.size();
    std::size_t n = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (valid[i]) ++n;
    return n;
}

double FrequencySeries::gap_fraction() const {
    if (y.empty()) return 0.0;
    return 1.0 - static_cast<double>(valid_count()) / static_cast<double>(y.size());
}

} // namespace fiberlink
