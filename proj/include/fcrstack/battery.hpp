#pragma once

#include <cmath>
#include <deque>
#include <string>

#include "fcrstack/errors.hpp"

namespace fcrstack {

struct BatteryParams {
    double p_nom_mw = 10.0;
    double e_cap_mwh = 20.0;
    double eta_c = 0.9;
    double eta_d = 0.9;

    void validate() const {
        if (!(p_nom_mw > 0)) throw ValidationError("battery: p_nom must be > 0");
        if (!(e_cap_mwh > 0)) throw ValidationError("battery: e_cap must be > 0");
        if (!(eta_c > 0 && eta_c <= 1)) throw ValidationError("battery: eta_c must be in (0, 1]");
        if (!(eta_d > 0 && eta_d <= 1)) throw ValidationError("battery: eta_d must be in (0, 1]");
    }
};

// Rolling record of grid-side discharge energy over a trailing horizon
// (default one day). Keeps a running sum so throughput queries are O(1).
class DischargeWindow {
public:
    explicit DischargeWindow(double horizon_min = 1440.0)
        : horizon_s_(horizon_min * 60.0) {}

    double horizon_minutes() const { return horizon_s_ / 60.0; }
    double now_s() const { return now_s_; }

    void advance(double dt_s) {
        now_s_ += dt_s;
        prune();
    }

    // Records discharge energy at the current clock position.
    void add(double energy_mwh) {
        if (energy_mwh <= 0.0) return;
        entries_.push_back({now_s_, energy_mwh});
        sum_mwh_ += energy_mwh;
    }

    double total_mwh() const { return sum_mwh_; }
    std::size_t size() const { return entries_.size(); }

    void clear() {
        entries_.clear();
        sum_mwh_ = 0.0;
        now_s_ = 0.0;
    }

private:
    void prune() {
        const double cutoff = now_s_ - horizon_s_;
        while (!entries_.empty() && entries_.front().t_s < cutoff) {
            sum_mwh_ -= entries_.front().energy_mwh;
            entries_.pop_front();
        }
        if (entries_.empty()) sum_mwh_ = 0.0;
    }

    struct Entry {
        double t_s;
        double energy_mwh;
    };

    double horizon_s_;
    double now_s_ = 0.0;
    double sum_mwh_ = 0.0;
    std::deque<Entry> entries_;
};

struct BatteryState {
    double e_mwh = 0.0;
    DischargeWindow cycle_window;
};

// One integration step of the stored-energy balance. Charge and discharge are
// exclusive grid-side powers; the result is not clipped to [0, e_cap] so that
// bound violations stay visible to the safety layer. Takes the state by value:
// move it in on hot paths, the rolling window then transfers without copying.
inline BatteryState step_soe(BatteryState state, double p_charge_mw, double p_discharge_mw,
                             double dt_h, const BatteryParams& params) {
    if (p_charge_mw < 0.0 || p_discharge_mw < 0.0)
        throw ValidationError("step_soe: negative power component");
    if (p_charge_mw > 0.0 && p_discharge_mw > 0.0)
        throw ValidationError("step_soe: simultaneous charge and discharge");
    constexpr double kTol = 1e-9;
    if (p_charge_mw > params.p_nom_mw + kTol || p_discharge_mw > params.p_nom_mw + kTol)
        throw ValidationError("step_soe: power above nominal rating");
    if (dt_h < 0.0) throw ValidationError("step_soe: negative dt");

    state.e_mwh += (params.eta_c * p_charge_mw - p_discharge_mw / params.eta_d) * dt_h;
    state.cycle_window.advance(dt_h * 3600.0);
    state.cycle_window.add(p_discharge_mw * dt_h);
    return state;
}

// Equivalent full cycles over the window's trailing horizon.
inline double cycle_throughput(const DischargeWindow& window, double e_cap_mwh) {
    return window.total_mwh() / e_cap_mwh;
}

} // namespace fcrstack
