#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fcrstack/bid_optimizer.hpp"
#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/market_data.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

// Bid schedule file: one row per 4-h block with the selected bid and the
// Monte-Carlo statistics of its adjusted profit. A uniform schedule is just a
// constant file.
inline void write_schedule_csv(const std::string& path, const BidSchedule& schedule,
                               std::int64_t start_s,
                               const std::vector<std::vector<CandidateStats>>* stats = nullptr) {
    CsvWriter w(path);
    w.row({"block_start", "bid_mw", "mean_j_adj", "std_j_adj"});
    for (std::size_t b = 0; b < schedule.bids.size(); ++b) {
        const int bid = schedule.bids[b].power_mw;
        double mean = 0.0, sd = 0.0;
        if (stats) {
            const CandidateStats& cs = (*stats)[b][static_cast<std::size_t>(bid)];
            mean = cs.mean_j_adj;
            sd = cs.std_j_adj;
        }
        w.row({format_iso8601(start_s + static_cast<std::int64_t>(b) * kSecondsPerBlock),
               std::to_string(bid), format_double(mean), format_double(sd)});
    }
    w.close();
}

struct LoadedSchedule {
    BidSchedule schedule;
    std::int64_t start_s = 0;
    std::vector<double> mean_j_adj;
    std::vector<double> std_j_adj;
};

inline LoadedSchedule read_schedule_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"block_start", "bid_mw", "mean_j_adj", "std_j_adj"})
        throw ParseError(path + ": not a bid schedule file (bad header)");
    if (t.rows.empty()) throw ValidationError(path + ": empty schedule");
    LoadedSchedule out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 2);
        if (row.size() != 4) throw ParseError(ctx + ": expected 4 columns");
        const std::int64_t bs = parse_iso8601(row[0]);
        if (r == 0) {
            if (bs % kSecondsPerBlock != 0)
                throw ValidationError(path + ": schedule must start on a block boundary");
            out.start_s = bs;
        } else if (bs != out.start_s + static_cast<std::int64_t>(r) * kSecondsPerBlock) {
            throw ValidationError(ctx + ": blocks must be contiguous");
        }
        out.schedule.bids.push_back(
            FcrBid{static_cast<int>(r), static_cast<int>(parse_int(row[1], ctx))});
        out.mean_j_adj.push_back(parse_double(row[2], ctx));
        out.std_j_adj.push_back(parse_double(row[3], ctx));
    }
    return out;
}

// Binds a schedule file to a dataset: same span, one bid per block.
inline BidSchedule bind_schedule(const LoadedSchedule& loaded, const MarketDataset& ds,
                                 const BatteryParams& params) {
    if (loaded.start_s != ds.start_s())
        throw ValidationError("schedule starts at " + format_iso8601(loaded.start_s) +
                              " but the dataset starts at " + format_iso8601(ds.start_s()));
    if (static_cast<std::int64_t>(loaded.schedule.bids.size()) != ds.blocks())
        throw ValidationError("schedule covers " + std::to_string(loaded.schedule.bids.size()) +
                              " blocks but the dataset has " + std::to_string(ds.blocks()));
    loaded.schedule.validate(params);
    return loaded.schedule;
}

// Full candidate table behind a Stage-1 run, for reporting.
inline void write_candidates_csv(const std::string& path,
                                 const std::vector<std::vector<CandidateStats>>& stats,
                                 std::int64_t start_s) {
    CsvWriter w(path);
    w.row({"block_start", "bid_mw", "mean_j_adj", "std_j_adj", "violation_seconds"});
    for (std::size_t b = 0; b < stats.size(); ++b)
        for (std::size_t k = 0; k < stats[b].size(); ++k)
            w.row({format_iso8601(start_s + static_cast<std::int64_t>(b) * kSecondsPerBlock),
                   std::to_string(k), format_double(stats[b][k].mean_j_adj),
                   format_double(stats[b][k].std_j_adj),
                   std::to_string(stats[b][k].violation_count)});
    w.close();
}

// Per-block market context used by the report heatmap: the capacity clearing
// price and the within-block settlement price spread.
inline double block_price_sigma(const MarketDataset& ds, std::int64_t block) {
    const std::int64_t q0 = block * kQuartersPerBlock;
    double mean = 0.0;
    for (std::int64_t q = q0; q < q0 + kQuartersPerBlock; ++q) mean += ds.settlement(q);
    mean /= static_cast<double>(kQuartersPerBlock);
    double var = 0.0;
    for (std::int64_t q = q0; q < q0 + kQuartersPerBlock; ++q) {
        const double d = ds.settlement(q) - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(kQuartersPerBlock));
}

inline void write_block_stats_csv(const std::string& path, const MarketDataset& ds) {
    CsvWriter w(path);
    w.row({"block_start", "fcr_price_eur_mw", "imb_sigma_eur_mwh"});
    for (std::int64_t b = 0; b < ds.blocks(); ++b)
        w.row({format_iso8601(ds.start_s() + b * kSecondsPerBlock),
               format_double(ds.fcr_price(b)), format_double(block_price_sigma(ds, b))});
    w.close();
}

} // namespace fcrstack
