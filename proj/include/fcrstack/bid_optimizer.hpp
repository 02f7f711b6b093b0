#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "fcrstack/battery.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/fcr.hpp"
#include "fcrstack/heuristic.hpp"
#include "fcrstack/market_data.hpp"
#include "fcrstack/safety.hpp"
#include "fcrstack/settlement.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

struct MonteCarloPlan {
    int n_draws = 50;
    bool include_boundaries = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (include_boundaries && n_draws < 2)
            throw ValidationError("mc: n_draws must be >= 2 when boundaries are included");
        if (n_draws < 1) throw ValidationError("mc: n_draws must be >= 1");
    }
};

struct BidSchedule {
    std::vector<FcrBid> bids; // one per 4-h block

    int power_at(std::size_t block_index) const {
        if (block_index >= bids.size())
            throw ValidationError("schedule: block index out of range");
        return bids[block_index].power_mw;
    }

    void validate(const BatteryParams& params) const {
        if (bids.empty()) throw ValidationError("schedule: empty");
        for (const FcrBid& b : bids) b.validate(params);
    }

    bool is_uniform() const {
        for (const FcrBid& b : bids)
            if (b.power_mw != bids.front().power_mw) return false;
        return true;
    }

    static BidSchedule uniform(int power_mw, std::size_t n_blocks) {
        BidSchedule s;
        s.bids.reserve(n_blocks);
        for (std::size_t b = 0; b < n_blocks; ++b)
            s.bids.push_back(FcrBid{static_cast<int>(b), power_mw});
        return s;
    }
};

// Deterministic stratification of the feasible band: boundary points plus
// evenly spaced interior points. No sampling noise enters bid comparisons.
inline std::vector<double> draw_initial_soe(const FcrBid& bid, const MonteCarloPlan& plan,
                                            const BatteryParams& params, const FcrConfig& cfg) {
    plan.validate();
    const SoeBounds bounds = soe_bounds(bid, cfg, params);
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(plan.n_draws));
    const int n = plan.n_draws;
    if (plan.include_boundaries) {
        for (int i = 0; i < n; ++i)
            draws.push_back(bounds.lo_mwh + bounds.width() * i / static_cast<double>(n - 1));
        draws.front() = bounds.lo_mwh;
        draws.back() = bounds.hi_mwh;
    } else {
        for (int i = 0; i < n; ++i)
            draws.push_back(bounds.lo_mwh + bounds.width() * (i + 0.5) / static_cast<double>(n));
    }
    return draws;
}

// A contiguous slice of the dataset simulated as one settlement unit. Usually
// one full 4-h block; shorter whole-quarter slices are allowed for testing.
struct BlockView {
    const MarketDataset* ds = nullptr;
    std::int64_t start_s = 0;
    std::int64_t n_seconds = kSecondsPerBlock;
    std::int64_t block_index = 0;

    static BlockView of_block(const MarketDataset& ds, std::int64_t block_index) {
        return BlockView{&ds, ds.start_s() + block_index * kSecondsPerBlock, kSecondsPerBlock,
                         block_index};
    }

    void validate() const {
        if (!ds) throw ValidationError("block view: no dataset");
        if (start_s % kSecondsPerQuarter != 0 || n_seconds <= 0 ||
            n_seconds % kSecondsPerQuarter != 0)
            throw ValidationError("block view: slice not aligned to quarter-hours");
        if (start_s < ds->start_s() || start_s + n_seconds > ds->end_s())
            throw ValidationError("block view: slice outside dataset span");
        if (block_index < 0 || block_index >= ds->blocks())
            throw ValidationError("block view: block index out of range");
    }
};

// Median settlement price of the block after the view; the view's own median
// when no following block exists.
inline double next_block_median_price(const BlockView& view) {
    const MarketDataset& ds = *view.ds;
    const std::int64_t next_start = view.start_s + view.n_seconds;
    std::vector<double> prices;
    if (next_start + kSecondsPerBlock <= ds.end_s()) {
        const std::int64_t q0 = ds.quarter_index(next_start);
        for (std::int64_t q = q0; q < q0 + kQuartersPerBlock; ++q)
            prices.push_back(ds.settlement(q));
    } else {
        const std::int64_t q0 = ds.quarter_index(view.start_s);
        const std::int64_t nq = view.n_seconds / kSecondsPerQuarter;
        for (std::int64_t q = q0; q < q0 + nq; ++q) prices.push_back(ds.settlement(q));
    }
    return median(std::move(prices));
}

// One row per simulated second, for trace export and oracle re-integration.
struct SecondSample {
    std::int64_t t_s;
    double freq_dev_mhz;
    double p_fcr_mw;
    double p_imb_mw;
    double soe_mwh;
};

// Full-resolution rollout of one block under the rule-based controller:
// activation every second, an imbalance decision every minute, settlement
// every quarter-hour, capacity revenue and terminal-value adjustment at the
// end. Out-of-band excursions trigger the same override as the RL layer and
// are counted.
inline BlockEvaluation simulate_block(const FcrBid& bid, double initial_soe_mwh,
                                      const BlockView& view, const PriceThresholds& thresholds,
                                      const HeuristicConfig& heuristic_cfg,
                                      const BatteryParams& params, const FcrConfig& fcr_cfg,
                                      std::vector<SecondSample>* trace = nullptr,
                                      Ledger* ledger = nullptr) {
    view.validate();
    heuristic_cfg.validate();
    const MarketDataset& ds = *view.ds;
    const SoeBounds bounds = soe_bounds(bid, fcr_cfg, params);
    const double residual = params.p_nom_mw - bid.power_mw;
    const double dt_h = 1.0 / 3600.0;

    BatteryState state;
    state.e_mwh = initial_soe_mwh;

    double p_imb_setpoint = 0.0;
    double quarter_energy_mwh = 0.0;
    double pi_imb = 0.0;
    int violations = 0;

    for (std::int64_t sec = 0; sec < view.n_seconds; ++sec) {
        const std::int64_t t = view.start_s + sec;
        if (sec % kSecondsPerMinute == 0) {
            const double price = ds.indicator(ds.minute_index(t));
            p_imb_setpoint = heuristic_action(state.e_mwh, bounds, price, thresholds, residual,
                                              heuristic_cfg, params);
        }
        const double p_fcr = fcr_activation(bid, ds.freq_dev_mhz(ds.second_index(t)), fcr_cfg);
        double p_imb = p_imb_setpoint;
        if (!bounds.contains(state.e_mwh)) {
            const OverrideResult ovr = apply_override(p_imb_setpoint, state.e_mwh, bounds, residual);
            p_imb = ovr.p_imb_mw;
            ++violations;
        }
        const double p_total = total_power(p_fcr, p_imb, params.p_nom_mw);
        state = step_soe(std::move(state), std::max(0.0, -p_total), std::max(0.0, p_total), dt_h,
                         params);

        quarter_energy_mwh += (fcr_cfg.fcr_energy_settled ? p_total : p_imb) * dt_h;
        if (trace) trace->push_back({t, ds.freq_dev_mhz(ds.second_index(t)), p_fcr, p_imb, state.e_mwh});

        if ((sec + 1) % kSecondsPerQuarter == 0) {
            const std::int64_t quarter_start = t + 1 - kSecondsPerQuarter;
            const double price = ds.settlement(ds.quarter_index(quarter_start));
            pi_imb += settle_quarter_hour(quarter_energy_mwh, price);
            if (ledger) ledger->add_quarter(quarter_start, quarter_energy_mwh, price);
            quarter_energy_mwh = 0.0;
        }
    }

    const double clearing = ds.fcr_price(view.block_index);
    const double r_fcr = fcr_capacity_revenue(bid, clearing);
    if (ledger) ledger->add_fcr(view.start_s, bid, clearing);
    const double pi_bar_next = next_block_median_price(view);
    return BlockEvaluation::make(r_fcr, pi_imb, state.e_mwh - initial_soe_mwh, pi_bar_next,
                                 violations);
}

// Highest mean adjusted profit; ties go to the lower bid, which leaves more
// residual flexibility for the real-time layer.
inline int select_bid(const std::vector<std::vector<BlockEvaluation>>& evaluations) {
    if (evaluations.empty()) throw ValidationError("select_bid: no candidates");
    const std::size_t n_draws = evaluations.front().size();
    if (n_draws == 0) throw ValidationError("select_bid: candidate with no draws");
    int best = 0;
    double best_mean = 0.0;
    for (std::size_t k = 0; k < evaluations.size(); ++k) {
        if (evaluations[k].size() != n_draws)
            throw ValidationError("select_bid: draw counts differ between candidates");
        double mean = 0.0;
        for (const BlockEvaluation& ev : evaluations[k]) mean += ev.j_adj;
        mean /= static_cast<double>(n_draws);
        if (k == 0 || mean > best_mean) {
            best = static_cast<int>(k);
            best_mean = mean;
        }
    }
    return best;
}

struct CandidateStats {
    double mean_j_adj = 0.0;
    double std_j_adj = 0.0;
    int violation_count = 0;
};

struct OptimizeResult {
    BidSchedule schedule;
    std::vector<std::vector<CandidateStats>> stats; // [block][candidate bid]
};

inline int max_candidate_bid(const BatteryParams& params) {
    return static_cast<int>(std::floor(params.p_nom_mw - 1.0 + 1e-9));
}

// Stage 1: per block, evaluate every integer bid below the nominal rating
// over the stratified initial-SoE draws and keep the argmax. Blocks are
// independent, so (block, candidate) jobs fan out across threads and results
// land in fixed slots regardless of scheduling.
inline OptimizeResult optimize_schedule(const MarketDataset& ds, const MonteCarloPlan& plan,
                                        const BatteryParams& params, const FcrConfig& fcr_cfg,
                                        const HeuristicConfig& heuristic_cfg,
                                        const PriceThresholds& thresholds, int n_threads = 0) {
    plan.validate();
    params.validate();
    fcr_cfg.validate();
    const std::int64_t n_blocks = ds.blocks();
    const int n_candidates = max_candidate_bid(params) + 1;
    if (n_candidates < 1) throw ValidationError("optimize: no feasible candidate bids");

    std::vector<std::vector<std::vector<BlockEvaluation>>> evals(
        static_cast<std::size_t>(n_blocks),
        std::vector<std::vector<BlockEvaluation>>(static_cast<std::size_t>(n_candidates)));

    const std::int64_t n_jobs = n_blocks * n_candidates;
    std::atomic<std::int64_t> next_job{0};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t job = next_job.fetch_add(1);
            if (job >= n_jobs) return;
            const std::int64_t b = job / n_candidates;
            const int k = static_cast<int>(job % n_candidates);
            const FcrBid bid{static_cast<int>(b), k};
            const BlockView view = BlockView::of_block(ds, b);
            const std::vector<double> draws = draw_initial_soe(bid, plan, params, fcr_cfg);
            auto& slot = evals[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
            slot.reserve(draws.size());
            for (double e0 : draws)
                slot.push_back(
                    simulate_block(bid, e0, view, thresholds, heuristic_cfg, params, fcr_cfg));
        }
    };

    int hw = n_threads > 0 ? n_threads : static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (hw > 1) {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(hw));
        for (int i = 0; i < hw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    } else {
        worker();
    }

    OptimizeResult result;
    result.stats.resize(static_cast<std::size_t>(n_blocks));
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        auto& block_evals = evals[static_cast<std::size_t>(b)];
        const int chosen = select_bid(block_evals);
        result.schedule.bids.push_back(FcrBid{static_cast<int>(b), chosen});
        auto& row = result.stats[static_cast<std::size_t>(b)];
        row.resize(static_cast<std::size_t>(n_candidates));
        for (int k = 0; k < n_candidates; ++k) {
            const auto& draws = block_evals[static_cast<std::size_t>(k)];
            double mean = 0.0;
            int violations = 0;
            for (const BlockEvaluation& ev : draws) {
                mean += ev.j_adj;
                violations += ev.violation_count;
            }
            mean /= static_cast<double>(draws.size());
            double var = 0.0;
            for (const BlockEvaluation& ev : draws) {
                const double d = ev.j_adj - mean;
                var += d * d;
            }
            var /= static_cast<double>(draws.size());
            row[static_cast<std::size_t>(k)] = {mean, std::sqrt(var), violations};
        }
    }
    return result;
}

} // namespace fcrstack
