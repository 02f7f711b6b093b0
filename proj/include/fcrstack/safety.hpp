#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "fcrstack/battery.hpp"
#include "fcrstack/fcr.hpp"

namespace fcrstack {

enum class EnvAction { charge = 0, idle = 1, discharge = 2 };
inline constexpr int kActionCount = 3;

inline double action_setpoint(EnvAction a, double residual_power_mw) {
    switch (a) {
    case EnvAction::charge: return -residual_power_mw;
    case EnvAction::discharge: return residual_power_mw;
    default: return 0.0;
    }
}

struct ActionMask {
    std::array<bool, kActionCount> allowed{true, true, true};

    bool is_allowed(EnvAction a) const { return allowed[static_cast<int>(a)]; }
    int count() const {
        int n = 0;
        for (bool b : allowed) n += b;
        return n;
    }
};

// SoE after holding a constant grid power for dt.
inline double project_soe(double soe_mwh, double p_total_mw, const BatteryParams& params,
                          double dt_h) {
    const double p_charge = std::max(0.0, -p_total_mw);
    const double p_discharge = std::max(0.0, p_total_mw);
    return soe_mwh + (params.eta_c * p_charge - p_discharge / params.eta_d) * dt_h;
}

namespace detail {

// Violation depth of the worst-case projection of an action: its own setpoint
// plus a full minute of adverse activation at the committed capacity, checked
// against the active band and, near a block change, the upcoming one.
inline double mask_violation(double soe_mwh, double setpoint_mw, int bid_mw,
                             const SoeBounds& active, const SoeBounds& upcoming,
                             bool check_upcoming, const BatteryParams& params, double dt_h) {
    const double e_hi = project_soe(soe_mwh, setpoint_mw - bid_mw, params, dt_h);
    const double e_lo = project_soe(soe_mwh, setpoint_mw + bid_mw, params, dt_h);
    double v = std::max(0.0, active.lo_mwh - e_lo) + std::max(0.0, e_hi - active.hi_mwh);
    if (check_upcoming)
        v += std::max(0.0, upcoming.lo_mwh - e_lo) + std::max(0.0, e_hi - upcoming.hi_mwh);
    return v;
}

} // namespace detail

// Masks actions whose worst-case one-interval projection exits the band. At
// least one action always survives: if everything violates, the
// least-violating one stays available (idle preferred on ties).
inline ActionMask action_mask(double soe_mwh, const SoeBounds& active, const SoeBounds& upcoming,
                              bool check_upcoming, int bid_mw, double residual_power_mw,
                              const BatteryParams& params, double dt_h = 1.0 / 60.0) {
    constexpr double kTol = 1e-9;
    std::array<double, kActionCount> violation{};
    ActionMask mask;
    for (int a = 0; a < kActionCount; ++a) {
        const double setpoint = action_setpoint(static_cast<EnvAction>(a), residual_power_mw);
        violation[a] = detail::mask_violation(soe_mwh, setpoint, bid_mw, active, upcoming,
                                              check_upcoming, params, dt_h);
        mask.allowed[a] = violation[a] <= kTol;
    }
    if (mask.count() == 0) {
        int best = static_cast<int>(EnvAction::idle);
        for (int a : {static_cast<int>(EnvAction::charge), static_cast<int>(EnvAction::discharge)})
            if (violation[a] < violation[best]) best = a;
        mask.allowed[best] = true;
    }
    return mask;
}

struct OverrideResult {
    double p_imb_mw;
    bool fired;
};

// Reactive backstop: when sub-minute activation has pushed the SoE outside
// the band, replace the setpoint with the strongest corrective one available.
inline OverrideResult apply_override(double proposed_p_imb_mw, double soe_mwh,
                                     const SoeBounds& bounds, double residual_power_mw) {
    if (soe_mwh < bounds.lo_mwh) return {-residual_power_mw, true};
    if (soe_mwh > bounds.hi_mwh) return {residual_power_mw, true};
    return {proposed_p_imb_mw, false};
}

} // namespace fcrstack
