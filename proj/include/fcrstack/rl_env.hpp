#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fcrstack/battery.hpp"
#include "fcrstack/bid_optimizer.hpp"
#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/fcr.hpp"
#include "fcrstack/market_data.hpp"
#include "fcrstack/rng.hpp"
#include "fcrstack/safety.hpp"
#include "fcrstack/settlement.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

struct RewardConfig {
    double lambda_c = 500.0;           // EUR per excess equivalent cycle
    double c_max = 1.15;               // daily cycle budget
    double soe_margin_weight = 1.0;    // EUR-scale proximity penalty weight
    double soe_violation_weight = 100.0; // EUR per MWh of violation depth
    double margin_threshold = 0.10;    // proximity shell, fraction of the band
    double override_penalty = 10.0;
    double gamma = 0.995;

    void validate() const {
        if (lambda_c < 0 || soe_margin_weight < 0 || soe_violation_weight < 0 ||
            override_penalty < 0)
            throw ValidationError("reward: weights must be >= 0");
        if (!(c_max > 0)) throw ValidationError("reward: c_max must be > 0");
        if (!(margin_threshold >= 0 && margin_threshold <= 1))
            throw ValidationError("reward: margin_threshold must be in [0, 1]");
        if (!(gamma >= 0 && gamma < 1)) throw ValidationError("reward: gamma must be in [0, 1)");
    }
};

struct RewardComponents {
    double r_imb = 0.0;
    double r_soe = 0.0;
    double r_cycle = 0.0;
    double r_override = 0.0;

    double total() const { return r_imb + r_soe + r_cycle + r_override; }
};

// Per-minute reward: dense cash via the indicator-price proxy, a linear
// proximity/violation penalty on the reserve band, the soft cycle-budget
// penalty, and a constant charge per safety intervention.
inline RewardComponents compute_reward(double cash_eur, double soe_mwh, const SoeBounds& bounds,
                                       double cycles_in_window, bool override_fired,
                                       const RewardConfig& cfg) {
    RewardComponents r;
    r.r_imb = cash_eur;
    const double band = bounds.width();
    const double dist_norm =
        band > 0 ? std::max(0.0, std::min(soe_mwh - bounds.lo_mwh, bounds.hi_mwh - soe_mwh)) / band
                 : 0.0;
    const double depth =
        std::max(0.0, bounds.lo_mwh - soe_mwh) + std::max(0.0, soe_mwh - bounds.hi_mwh);
    r.r_soe = -cfg.soe_margin_weight * std::max(0.0, cfg.margin_threshold - dist_norm) -
              cfg.soe_violation_weight * depth;
    r.r_cycle = -cfg.lambda_c * std::max(0.0, cycles_in_window - cfg.c_max);
    r.r_override = override_fired ? -cfg.override_penalty : 0.0;
    return r;
}

namespace obs_idx {
inline constexpr int price = 0;
inline constexpr int quarter_of_day = 1;
inline constexpr int minute_in_quarter = 2;
inline constexpr int month = 3;
inline constexpr int soe_fraction = 4;
inline constexpr int cycle_ratio = 5;
inline constexpr int dist_lo = 6;
inline constexpr int dist_hi = 7;
inline constexpr int dist_lo_next = 8;
inline constexpr int dist_hi_next = 9;
inline constexpr int bid = 10;
inline constexpr int next_bid = 11;
inline constexpr int minutes_to_block = 12;
} // namespace obs_idx

struct Observation {
    static constexpr int kDim = 13;
    std::array<double, kDim> v{};

    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

struct StepInfo {
    double cash_eur = 0.0;          // proxy cash incl. quarter reconciliation
    double settled_energy_mwh = 0.0;
    double fcr_energy_mwh = 0.0;
    double soe_mwh = 0.0;
    double cycles_in_window = 0.0;
    double max_excursion_mwh = 0.0; // worst in-minute distance outside the band
};

struct StepOutcome {
    Observation next;
    RewardComponents reward;
    bool override_fired = false;
    bool done = false;
    StepInfo info;
};

struct EnvConfig {
    std::int64_t episode_minutes = kMinutesPerDay; // whole blocks only
    std::int64_t lookahead_min = 30;               // upcoming-band mask window
    bool uniform_init = false;                     // else mid-band start
    double price_norm = 500.0;                     // indicator normalization scale
    std::uint64_t seed = 0;

    void validate() const {
        if (episode_minutes <= 0 || episode_minutes % kMinutesPerBlock != 0)
            throw ValidationError("env: episode_minutes must cover whole 4-h blocks");
        if (lookahead_min < 0 || lookahead_min > kMinutesPerBlock)
            throw ValidationError("env: lookahead must be in [0, 240] minutes");
        if (!(price_norm > 0)) throw ValidationError("env: price_norm must be > 0");
    }
};

struct TraceRow {
    std::int64_t t_s;
    int action;
    double p_imb_mw;
    double soe_mwh;
    double indicator;
    double reward;
    bool override_fired;
};

// One-day MDP over a dataset slice and a bid schedule: a 1-minute decision
// step embedding 60 one-second activation sub-steps, masked discrete actions
// and the reactive override.
class Environment {
public:
    Environment(const MarketDataset& ds, const BidSchedule& schedule, const BatteryParams& params,
                const FcrConfig& fcr_cfg, const RewardConfig& reward_cfg, const EnvConfig& env_cfg)
        : ds_(&ds), schedule_(schedule), params_(params), fcr_cfg_(fcr_cfg),
          reward_cfg_(reward_cfg), cfg_(env_cfg), rng_(make_rng(env_cfg.seed, 0xe417)) {
        params_.validate();
        fcr_cfg_.validate();
        reward_cfg_.validate();
        cfg_.validate();
        schedule_.validate(params_);
        if (static_cast<std::int64_t>(schedule_.bids.size()) != ds.blocks())
            throw ValidationError("env: schedule must cover every block of the dataset");
    }

    // Restrict which days reset() accepts (a split iterator contract).
    void set_allowed_days(std::vector<std::int64_t> days) { allowed_days_ = std::move(days); }

    Observation reset(std::int64_t day_start_s) {
        if (day_start_s % kSecondsPerDay != 0)
            throw ValidationError("env: reset timestamp must be midnight UTC");
        if (day_start_s < ds_->start_s() ||
            day_start_s + cfg_.episode_minutes * kSecondsPerMinute > ds_->end_s())
            throw ValidationError("env: day " + format_iso8601(day_start_s) +
                                  " episode not covered by the dataset");
        if (!allowed_days_.empty() &&
            !std::binary_search(allowed_days_.begin(), allowed_days_.end(), day_start_s))
            throw ValidationError("env: day " + format_iso8601(day_start_s) +
                                  " not in the requested split");

        day_start_s_ = day_start_s;
        minute_ = 0;
        done_ = false;
        active_ = true;

        const SoeBounds first = bounds_at_minute(0);
        double e0 = 0.5 * (first.lo_mwh + first.hi_mwh);
        if (cfg_.uniform_init) {
            std::uniform_real_distribution<double> dist(first.lo_mwh, first.hi_mwh);
            e0 = dist(rng_);
        }
        state_ = BatteryState();
        state_.e_mwh = e0;
        initial_soe_mwh_ = e0;

        ledger_.clear();
        trace_.clear();
        quarter_energy_mwh_ = 0.0;
        quarter_proxy_cash_ = 0.0;
        override_minutes_ = 0;
        boundary_violations_ = 0;
        day_discharge_mwh_ = 0.0;
        max_excursion_mwh_ = 0.0;
        return observe(0);
    }

    ActionMask mask() const {
        require_active();
        return mask_at(minute_, state_.e_mwh);
    }

    StepOutcome step(EnvAction action) {
        require_active();
        const std::int64_t t0 = minute_start(minute_);
        const std::int64_t block = ds_->block_index(t0);
        const int bid_mw = schedule_.power_at(static_cast<std::size_t>(block));
        const FcrBid bid{static_cast<int>(block), bid_mw};
        const SoeBounds bounds = soe_bounds(bid, fcr_cfg_, params_);
        const double residual = params_.p_nom_mw - bid_mw;
        const double p_imb_base = action_setpoint(action, residual);
        const double dt_h = 1.0 / 3600.0;

        if (t0 % kSecondsPerBlock == 0) ledger_.add_fcr(t0, bid, ds_->fcr_price(block));

        bool fired = false;
        double minute_energy_mwh = 0.0;
        double fcr_energy_mwh = 0.0;
        double excursion = 0.0;
        for (int s = 0; s < kSecondsPerMinute; ++s) {
            const std::int64_t t = t0 + s;
            const double p_fcr =
                fcr_activation(bid, ds_->freq_dev_mhz(ds_->second_index(t)), fcr_cfg_);
            double p_imb = p_imb_base;
            if (!bounds.contains(state_.e_mwh)) {
                const OverrideResult ovr =
                    apply_override(p_imb_base, state_.e_mwh, bounds, residual);
                p_imb = ovr.p_imb_mw;
                fired = fired || ovr.fired;
            }
            const double p_total = total_power(p_fcr, p_imb, params_.p_nom_mw);
            state_ = step_soe(std::move(state_), std::max(0.0, -p_total), std::max(0.0, p_total),
                              dt_h, params_);

            const double settled = fcr_cfg_.fcr_energy_settled ? p_total : p_imb;
            minute_energy_mwh += settled * dt_h;
            fcr_energy_mwh += p_fcr * dt_h;
            day_discharge_mwh_ += std::max(0.0, p_total) * dt_h;
            excursion = std::max(excursion, std::max(bounds.lo_mwh - state_.e_mwh,
                                                     state_.e_mwh - bounds.hi_mwh));
        }
        excursion = std::max(excursion, 0.0);
        max_excursion_mwh_ = std::max(max_excursion_mwh_, excursion);
        quarter_energy_mwh_ += minute_energy_mwh;

        double cash = minute_energy_mwh * ds_->indicator(ds_->minute_index(t0));
        quarter_proxy_cash_ += cash;
        if ((minute_ + 1) % kMinutesPerQuarter == 0) {
            const std::int64_t quarter_start = t0 + kSecondsPerMinute - kSecondsPerQuarter;
            const double price = ds_->settlement(ds_->quarter_index(quarter_start));
            const double true_cash = settle_quarter_hour(quarter_energy_mwh_, price);
            ledger_.add_quarter(quarter_start, quarter_energy_mwh_, price);
            cash += true_cash - quarter_proxy_cash_;
            quarter_energy_mwh_ = 0.0;
            quarter_proxy_cash_ = 0.0;
        }

        const double cycles = cycle_throughput(state_.cycle_window, params_.e_cap_mwh);
        const RewardComponents reward =
            compute_reward(cash, state_.e_mwh, bounds, cycles, fired, reward_cfg_);

        if (fired) ++override_minutes_;
        ++minute_;
        done_ = minute_ >= cfg_.episode_minutes;
        const SoeBounds next_bounds = bounds_at_minute(done_ ? minute_ - 1 : minute_);
        if (!next_bounds.contains(state_.e_mwh, 1e-9)) ++boundary_violations_;

        StepOutcome out;
        out.next = observe(done_ ? minute_ - 1 : minute_);
        out.reward = reward;
        out.override_fired = fired;
        out.done = done_;
        out.info = {cash,  minute_energy_mwh, fcr_energy_mwh, state_.e_mwh, cycles, excursion};
        if (done_) active_ = false;

        trace_.push_back({t0, static_cast<int>(action), p_imb_base, state_.e_mwh,
                          ds_->indicator(ds_->minute_index(t0)), reward.total(), fired});
        return out;
    }

    const Ledger& ledger() const { return ledger_; }
    const BatteryState& state() const { return state_; }
    double initial_soe_mwh() const { return initial_soe_mwh_; }
    double day_discharge_mwh() const { return day_discharge_mwh_; }
    double day_cycles() const { return day_discharge_mwh_ / params_.e_cap_mwh; }
    int override_minutes() const { return override_minutes_; }
    int boundary_violations() const { return boundary_violations_; }
    double max_excursion_mwh() const { return max_excursion_mwh_; }
    std::int64_t episode_minutes() const { return cfg_.episode_minutes; }
    const BatteryParams& params() const { return params_; }
    const RewardConfig& reward_config() const { return reward_cfg_; }

    void write_trace_csv(const std::string& path) const {
        CsvWriter w(path);
        w.row({"timestamp", "action", "p_imb_mw", "soe_mwh", "indicator_eur_mwh", "reward",
               "override"});
        for (const TraceRow& r : trace_)
            w.row({format_iso8601(r.t_s), std::to_string(r.action), format_double(r.p_imb_mw),
                   format_double(r.soe_mwh), format_double(r.indicator), format_double(r.reward),
                   r.override_fired ? "1" : "0"});
        w.close();
    }

private:
    void require_active() const {
        if (!active_) throw SimulationError("env: step/mask before reset or after episode end");
    }

    std::int64_t minute_start(std::int64_t minute) const {
        return day_start_s_ + minute * kSecondsPerMinute;
    }

    SoeBounds bounds_at_minute(std::int64_t minute) const {
        const std::int64_t m = std::min(minute, cfg_.episode_minutes - 1);
        const std::int64_t block = ds_->block_index(minute_start(m));
        const FcrBid b{static_cast<int>(block), schedule_.power_at(static_cast<std::size_t>(block))};
        return soe_bounds(b, fcr_cfg_, params_);
    }

    // Bid of the block after the one covering `minute`; the current bid when
    // the episode ends first.
    int next_block_bid(std::int64_t minute) const {
        const std::int64_t t = minute_start(std::min(minute, cfg_.episode_minutes - 1));
        const std::int64_t next_start = (t / kSecondsPerBlock + 1) * kSecondsPerBlock;
        const std::int64_t episode_end = minute_start(cfg_.episode_minutes);
        if (next_start >= episode_end)
            return schedule_.power_at(static_cast<std::size_t>(ds_->block_index(t)));
        return schedule_.power_at(static_cast<std::size_t>(ds_->block_index(next_start)));
    }

    ActionMask mask_at(std::int64_t minute, double soe) const {
        const std::int64_t t = minute_start(minute);
        const std::int64_t block = ds_->block_index(t);
        const int bid_mw = schedule_.power_at(static_cast<std::size_t>(block));
        const SoeBounds active = bounds_at_minute(minute);
        const int nb = next_block_bid(minute);
        const SoeBounds upcoming =
            soe_bounds(FcrBid{0, nb}, fcr_cfg_, params_);
        const std::int64_t mins_to_block =
            (kSecondsPerBlock - t % kSecondsPerBlock) / kSecondsPerMinute;
        const bool check_upcoming = mins_to_block <= cfg_.lookahead_min;
        return action_mask(soe, active, upcoming, check_upcoming, bid_mw,
                           params_.p_nom_mw - bid_mw, params_);
    }

    Observation observe(std::int64_t minute) const {
        const std::int64_t t = minute_start(minute);
        const std::int64_t day_minute = (t - day_start(t)) / kSecondsPerMinute;
        const std::int64_t block = ds_->block_index(t);
        const int bid_mw = schedule_.power_at(static_cast<std::size_t>(block));
        const SoeBounds active = bounds_at_minute(minute);
        const int nb = next_block_bid(minute);
        const SoeBounds upcoming = soe_bounds(FcrBid{0, nb}, fcr_cfg_, params_);
        const std::int64_t mins_to_block =
            (kSecondsPerBlock - t % kSecondsPerBlock) / kSecondsPerMinute;

        const double e = state_.e_mwh;
        const double cap = params_.e_cap_mwh;
        auto clamp1 = [](double x) { return std::clamp(x, -1.0, 1.0); };

        Observation o;
        o.v[obs_idx::price] =
            clamp1(ds_->indicator(ds_->minute_index(t)) / cfg_.price_norm);
        o.v[obs_idx::quarter_of_day] =
            static_cast<double>(day_minute / kMinutesPerQuarter) / (kQuartersPerDay - 1);
        o.v[obs_idx::minute_in_quarter] =
            static_cast<double>(day_minute % kMinutesPerQuarter) / (kMinutesPerQuarter - 1);
        o.v[obs_idx::month] = (civil_of(t).month - 1) / 11.0;
        o.v[obs_idx::soe_fraction] = std::clamp(e / cap, 0.0, 1.0);
        o.v[obs_idx::cycle_ratio] =
            std::min(cycle_throughput(state_.cycle_window, cap) / reward_cfg_.c_max, 2.0) / 2.0;
        o.v[obs_idx::dist_lo] = clamp1((e - active.lo_mwh) / cap);
        o.v[obs_idx::dist_hi] = clamp1((active.hi_mwh - e) / cap);
        o.v[obs_idx::dist_lo_next] = clamp1((e - upcoming.lo_mwh) / cap);
        o.v[obs_idx::dist_hi_next] = clamp1((upcoming.hi_mwh - e) / cap);
        o.v[obs_idx::bid] = bid_mw / params_.p_nom_mw;
        o.v[obs_idx::next_bid] = nb / params_.p_nom_mw;
        o.v[obs_idx::minutes_to_block] =
            static_cast<double>(mins_to_block) / static_cast<double>(kMinutesPerBlock);
        return o;
    }

    const MarketDataset* ds_;
    BidSchedule schedule_;
    BatteryParams params_;
    FcrConfig fcr_cfg_;
    RewardConfig reward_cfg_;
    EnvConfig cfg_;
    std::mt19937_64 rng_;

    std::vector<std::int64_t> allowed_days_;
    std::int64_t day_start_s_ = 0;
    std::int64_t minute_ = 0;
    bool done_ = false;
    bool active_ = false;
    BatteryState state_;
    double initial_soe_mwh_ = 0.0;

    Ledger ledger_;
    std::vector<TraceRow> trace_;
    double quarter_energy_mwh_ = 0.0;
    double quarter_proxy_cash_ = 0.0;
    int override_minutes_ = 0;
    int boundary_violations_ = 0;
    double day_discharge_mwh_ = 0.0;
    double max_excursion_mwh_ = 0.0;
};

} // namespace fcrstack
