#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcrstack/battery.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/fcr.hpp"

namespace fcrstack {

struct HeuristicConfig {
    double zone_low = 0.15;      // corrective zone fractions of the band
    double zone_high = 0.85;
    double buy_percentile = 20.0;
    double sell_percentile = 80.0;
    double power_fraction = 1.0; // fraction of residual power per action

    void validate() const {
        if (!(zone_low > 0 && zone_low < zone_high && zone_high < 1))
            throw ValidationError("heuristic: need 0 < zone_low < zone_high < 1");
        if (!(buy_percentile >= 0 && buy_percentile < sell_percentile && sell_percentile <= 100))
            throw ValidationError("heuristic: need 0 <= buy < sell <= 100 percentiles");
        if (!(power_fraction > 0 && power_fraction <= 1))
            throw ValidationError("heuristic: power_fraction must be in (0, 1]");
    }
};

// Linear-interpolation percentile (rank = p/100 * (n-1)).
inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw ValidationError("percentile of empty range");
    std::sort(values.begin(), values.end());
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

struct PriceThresholds {
    double buy_eur_mwh;
    double sell_eur_mwh;
};

// Thresholds are fixed over a reference period (the training split) so
// evaluation prices never leak into the rule.
inline PriceThresholds compute_thresholds(const std::vector<double>& reference_prices,
                                          const HeuristicConfig& cfg) {
    return {percentile(reference_prices, cfg.buy_percentile),
            percentile(reference_prices, cfg.sell_percentile)};
}

// Rule-based imbalance setpoint (signed MW, positive = inject). Corrective
// zone checks win over price triggers; the result is clipped so the SoE
// projected over one control interval stays inside the band.
inline double heuristic_action(double soe_mwh, const SoeBounds& bounds, double price_indicator,
                               const PriceThresholds& thresholds, double residual_power_mw,
                               const HeuristicConfig& cfg, const BatteryParams& params,
                               double dt_ctrl_h = 1.0 / 60.0) {
    if (residual_power_mw < 0) throw ValidationError("heuristic: negative residual power");
    const double band = bounds.width();
    const double low_edge = bounds.lo_mwh + cfg.zone_low * band;
    const double high_edge = bounds.lo_mwh + cfg.zone_high * band;

    double setpoint = 0.0;
    const double magnitude = cfg.power_fraction * residual_power_mw;
    if (soe_mwh < low_edge) {
        setpoint = -magnitude; // corrective charge
    } else if (soe_mwh > high_edge) {
        setpoint = magnitude; // corrective discharge
    } else if (price_indicator <= thresholds.buy_eur_mwh) {
        setpoint = -magnitude;
    } else if (price_indicator >= thresholds.sell_eur_mwh) {
        setpoint = magnitude;
    }

    if (setpoint < 0.0) {
        const double max_charge = std::max(0.0, (bounds.hi_mwh - soe_mwh) / (params.eta_c * dt_ctrl_h));
        setpoint = -std::min(-setpoint, max_charge);
    } else if (setpoint > 0.0) {
        const double max_discharge = std::max(0.0, (soe_mwh - bounds.lo_mwh) * params.eta_d / dt_ctrl_h);
        setpoint = std::min(setpoint, max_discharge);
    }
    return setpoint;
}

} // namespace fcrstack
