#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "fcrstack/battery.hpp"
#include "fcrstack/errors.hpp"

namespace fcrstack {

struct FcrConfig {
    double t_res_min = 25.0;              // reserve duration per direction
    double full_activation_mhz = 200.0;   // |deviation| for full activation
    double dead_band_mhz = 0.0;
    bool fcr_energy_settled = false;      // settle activation energy in the imbalance position

    void validate() const {
        if (!(t_res_min > 0)) throw ValidationError("fcr: t_res must be > 0");
        if (!(dead_band_mhz >= 0)) throw ValidationError("fcr: dead_band must be >= 0");
        if (!(full_activation_mhz > dead_band_mhz))
            throw ValidationError("fcr: full_activation must exceed dead_band");
    }
};

struct FcrBid {
    int block_index = 0;
    int power_mw = 0;

    void validate(const BatteryParams& params) const {
        if (power_mw < 0) throw ValidationError("bid: power must be >= 0");
        if (power_mw > params.p_nom_mw - 1.0)
            throw ValidationError("bid: power must be <= p_nom - 1 MW");
    }
};

struct SoeBounds {
    double lo_mwh = 0.0;
    double hi_mwh = 0.0;
    double width() const { return hi_mwh - lo_mwh; }
    bool contains(double e, double tol = 0.0) const {
        return e >= lo_mwh - tol && e <= hi_mwh + tol;
    }
};

// Feasible energy band: the asset must sustain full activation for t_res in
// either direction from anywhere inside it.
inline SoeBounds soe_bounds(const FcrBid& bid, const FcrConfig& cfg, const BatteryParams& params) {
    bid.validate(params);
    const double margin = bid.power_mw * cfg.t_res_min / 60.0;
    const double lo = margin;
    const double hi = params.e_cap_mwh - margin;
    if (lo > hi)
        throw InfeasibleBandError("reserve band empty: bid " + std::to_string(bid.power_mw) +
                                  " MW needs more than half the capacity as margin");
    return SoeBounds{lo, hi};
}

// Linear droop, saturated at the committed capacity. Under-frequency requires
// injection (positive), over-frequency absorption (negative).
inline double fcr_activation(const FcrBid& bid, double freq_deviation_mhz, const FcrConfig& cfg) {
    const double adf = std::abs(freq_deviation_mhz);
    if (adf <= cfg.dead_band_mhz) return 0.0;
    const double span = cfg.full_activation_mhz - cfg.dead_band_mhz;
    const double frac = std::min(1.0, (adf - cfg.dead_band_mhz) / span);
    const double magnitude = bid.power_mw * frac;
    return freq_deviation_mhz < 0.0 ? magnitude : -magnitude;
}

// Net grid injection. The caller maps the imbalance setpoint into the residual
// power P_nom - bid, so the converter limit can only break on a controller bug.
inline double total_power(double p_fcr_mw, double p_imb_mw, double p_nom_mw) {
    const double total = p_fcr_mw + p_imb_mw;
    if (std::abs(total) > p_nom_mw + 1e-9)
        throw ConverterLimitError("total power " + std::to_string(total) +
                                  " MW exceeds nominal rating");
    return total;
}

} // namespace fcrstack
