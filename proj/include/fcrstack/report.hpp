#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/schedule_io.hpp"

namespace fcrstack {

// One evaluated run: the aggregate metrics row plus the schedule it ran under.
struct RunSummary {
    std::string label;
    double total_eur = 0.0;
    double fcr_eur = 0.0;
    double imbalance_eur = 0.0;
    double cycles = 0.0;
};

inline std::string strategy_label(const BidSchedule& schedule) {
    if (schedule.is_uniform()) return "uniform-" + std::to_string(schedule.bids.front().power_mw);
    return "non-uniform";
}

inline RunSummary read_run_summary(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const std::string metrics_path = (fs::path(run_dir) / "metrics.csv").string();
    const std::string schedule_path = (fs::path(run_dir) / "schedule.csv").string();
    if (!fs::exists(metrics_path) || !fs::exists(schedule_path))
        throw ValidationError("run directory " + run_dir +
                              " is missing metrics.csv or schedule.csv");
    const CsvTable metrics = read_csv(metrics_path);
    RunSummary s;
    bool found_total = false;
    for (const auto& row : metrics.rows) {
        if (row.empty() || row[0] != "TOTAL") continue;
        s.fcr_eur = parse_double(row[2], metrics_path);
        s.imbalance_eur = parse_double(row[3], metrics_path);
        s.total_eur = s.fcr_eur + s.imbalance_eur;
        s.cycles = parse_double(row[4], metrics_path);
        found_total = true;
    }
    if (!found_total) throw ValidationError(metrics_path + ": no TOTAL row");
    s.label = strategy_label(read_schedule_csv(schedule_path).schedule);
    return s;
}

// Revenue decomposition and cycle usage per strategy, one row per run.
inline void write_comparison_csv(const std::string& path, const std::vector<RunSummary>& runs) {
    CsvWriter w(path);
    w.row({"strategy", "total_eur", "fcr_eur", "imbalance_eur", "cycles"});
    for (const RunSummary& r : runs)
        w.row({r.label, format_double(r.fcr_eur + r.imbalance_eur), format_double(r.fcr_eur),
               format_double(r.imbalance_eur), format_double(r.cycles)});
    w.close();
}

struct HeatmapPoint {
    double fcr_price;
    double sigma;
    int bid_mw;
};

struct HeatmapCell {
    double fcr_lo, fcr_hi;
    double sigma_lo, sigma_hi;
    double mean_bid;
    int blocks;
};

// Mean selected bid over an equal-width grid on (capacity price, within-block
// settlement spread). Degenerate axes collapse to a single bin.
inline std::vector<HeatmapCell> bin_heatmap(const std::vector<HeatmapPoint>& points, int bins) {
    if (points.empty()) throw ValidationError("heatmap: no blocks to bin");
    if (bins < 1) throw ValidationError("heatmap: bins must be >= 1");
    auto range = [&](auto get) {
        double lo = get(points.front()), hi = lo;
        for (const HeatmapPoint& p : points) {
            lo = std::min(lo, get(p));
            hi = std::max(hi, get(p));
        }
        return std::pair<double, double>{lo, hi};
    };
    const auto [flo, fhi] = range([](const HeatmapPoint& p) { return p.fcr_price; });
    const auto [slo, shi] = range([](const HeatmapPoint& p) { return p.sigma; });
    const int fbins = fhi > flo ? bins : 1;
    const int sbins = shi > slo ? bins : 1;
    const double fw = fbins > 0 && fhi > flo ? (fhi - flo) / fbins : 1.0;
    const double sw = sbins > 0 && shi > slo ? (shi - slo) / sbins : 1.0;

    std::vector<double> bid_sum(static_cast<std::size_t>(fbins) * sbins, 0.0);
    std::vector<int> count(static_cast<std::size_t>(fbins) * sbins, 0);
    for (const HeatmapPoint& p : points) {
        int fi = fhi > flo ? std::min(fbins - 1, static_cast<int>((p.fcr_price - flo) / fw)) : 0;
        int si = shi > slo ? std::min(sbins - 1, static_cast<int>((p.sigma - slo) / sw)) : 0;
        const std::size_t idx = static_cast<std::size_t>(fi) * sbins + si;
        bid_sum[idx] += p.bid_mw;
        count[idx] += 1;
    }

    std::vector<HeatmapCell> cells;
    for (int fi = 0; fi < fbins; ++fi) {
        for (int si = 0; si < sbins; ++si) {
            const std::size_t idx = static_cast<std::size_t>(fi) * sbins + si;
            if (count[idx] == 0) continue;
            cells.push_back({flo + fi * fw, fhi > flo ? flo + (fi + 1) * fw : fhi,
                             slo + si * sw, shi > slo ? slo + (si + 1) * sw : shi,
                             bid_sum[idx] / count[idx], count[idx]});
        }
    }
    return cells;
}

// Joins a schedule with its block context file, as written by the Stage-1
// command.
inline std::vector<HeatmapPoint> heatmap_points_from_run(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const std::string schedule_path = (fs::path(run_dir) / "schedule.csv").string();
    const std::string stats_path = (fs::path(run_dir) / "block_stats.csv").string();
    if (!fs::exists(schedule_path) || !fs::exists(stats_path))
        throw ValidationError("run directory " + run_dir +
                              " is missing schedule.csv or block_stats.csv");
    const LoadedSchedule sched = read_schedule_csv(schedule_path);
    const CsvTable stats = read_csv(stats_path);
    if (stats.rows.size() != sched.schedule.bids.size())
        throw ValidationError(stats_path + ": block count does not match the schedule");
    std::vector<HeatmapPoint> points;
    for (std::size_t b = 0; b < stats.rows.size(); ++b) {
        const auto& row = stats.rows[b];
        points.push_back({parse_double(row[1], stats_path), parse_double(row[2], stats_path),
                          sched.schedule.bids[b].power_mw});
    }
    return points;
}

inline void write_heatmap_csv(const std::string& path, const std::vector<HeatmapCell>& cells) {
    CsvWriter w(path);
    w.row({"fcr_price_lo", "fcr_price_hi", "sigma_lo", "sigma_hi", "mean_bid_mw", "blocks"});
    for (const HeatmapCell& c : cells)
        w.row({format_double(c.fcr_lo), format_double(c.fcr_hi), format_double(c.sigma_lo),
               format_double(c.sigma_hi), format_double(c.mean_bid), std::to_string(c.blocks)});
    w.close();
}

} // namespace fcrstack
