#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

// 1 s grid-frequency deviations relative to 50 Hz, in mHz.
struct FrequencyTrace {
    std::int64_t start_s = 0;
    std::vector<double> dev_mhz;
};

// 1-min price indicator plus the 15-min settlement price it previews.
struct ImbalancePriceSeries {
    std::int64_t start_s = 0;
    std::vector<double> indicator_eur_mwh;  // one per minute
    std::vector<double> settlement_eur_mwh; // one per quarter-hour

    void validate() const {
        if (indicator_eur_mwh.size() != settlement_eur_mwh.size() * kMinutesPerQuarter)
            throw ValidationError("imbalance series: minute count must be 15x quarter count");
    }
};

// 4-h capacity clearing prices, EUR/MW per block.
struct FcrPriceSeries {
    std::int64_t start_s = 0;
    std::vector<double> price_eur_mw;

    void validate() const {
        for (double p : price_eur_mw)
            if (p < 0) throw ValidationError("fcr prices: negative clearing price");
    }
};

// The four aligned series driving a simulation. Immutable after construction.
class MarketDataset {
public:
    MarketDataset(FrequencyTrace freq, ImbalancePriceSeries imbalance, FcrPriceSeries fcr)
        : freq_(std::move(freq)), imbalance_(std::move(imbalance)), fcr_(std::move(fcr)) {
        imbalance_.validate();
        fcr_.validate();
        if (freq_.start_s != imbalance_.start_s || freq_.start_s != fcr_.start_s)
            throw ValidationError("dataset: series start timestamps differ");
        if (freq_.dev_mhz.empty()) throw ValidationError("dataset: empty frequency trace");
        if (freq_.start_s % kSecondsPerBlock != 0)
            throw ValidationError("dataset: start must be aligned to a 4-h block boundary");
        const std::int64_t secs = static_cast<std::int64_t>(freq_.dev_mhz.size());
        if (secs % kSecondsPerBlock != 0)
            throw ValidationError("dataset: span must cover whole 4-h blocks");
        if (static_cast<std::int64_t>(imbalance_.indicator_eur_mwh.size()) != secs / kSecondsPerMinute)
            throw ValidationError("dataset: indicator length does not match frequency span");
        if (static_cast<std::int64_t>(fcr_.price_eur_mw.size()) != secs / kSecondsPerBlock)
            throw ValidationError("dataset: FCR price count does not match frequency span");
    }

    std::int64_t start_s() const { return freq_.start_s; }
    std::int64_t end_s() const { return freq_.start_s + seconds(); }
    std::int64_t seconds() const { return static_cast<std::int64_t>(freq_.dev_mhz.size()); }
    std::int64_t minutes() const { return seconds() / kSecondsPerMinute; }
    std::int64_t quarters() const { return seconds() / kSecondsPerQuarter; }
    std::int64_t blocks() const { return seconds() / kSecondsPerBlock; }
    std::int64_t days() const { return seconds() / kSecondsPerDay; }

    double freq_dev_mhz(std::int64_t second_index) const { return freq_.dev_mhz[second_index]; }
    double indicator(std::int64_t minute_index) const {
        return imbalance_.indicator_eur_mwh[minute_index];
    }
    double settlement(std::int64_t quarter_index) const {
        return imbalance_.settlement_eur_mwh[quarter_index];
    }
    double fcr_price(std::int64_t block_index) const { return fcr_.price_eur_mw[block_index]; }

    const FrequencyTrace& frequency() const { return freq_; }
    const ImbalancePriceSeries& imbalance() const { return imbalance_; }
    const FcrPriceSeries& fcr() const { return fcr_; }

    // Index of the series entry covering epoch second t.
    std::int64_t second_index(std::int64_t t) const { return checked_offset(t); }
    std::int64_t minute_index(std::int64_t t) const { return checked_offset(t) / kSecondsPerMinute; }
    std::int64_t quarter_index(std::int64_t t) const { return checked_offset(t) / kSecondsPerQuarter; }
    std::int64_t block_index(std::int64_t t) const { return checked_offset(t) / kSecondsPerBlock; }

    bool covers_day(std::int64_t day_start_s) const {
        return day_start_s >= start_s() && day_start_s + kSecondsPerDay <= end_s();
    }

private:
    std::int64_t checked_offset(std::int64_t t) const {
        if (t < start_s() || t >= end_s())
            throw ValidationError("dataset: timestamp " + format_iso8601(t) + " outside span");
        return t - start_s();
    }

    FrequencyTrace freq_;
    ImbalancePriceSeries imbalance_;
    FcrPriceSeries fcr_;
};

namespace detail {

inline int column_index(const CsvTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return static_cast<int>(i);
    return -1;
}

} // namespace detail

// Frequency CSV: header `timestamp,hz` (absolute) or `timestamp,mhz_dev`.
// Gaps of at most `max_gap_s` are filled by holding the last value.
inline FrequencyTrace load_frequency_csv(const std::string& path, std::int64_t max_gap_s = 60) {
    const CsvTable table = read_csv(path);
    const int tcol = detail::column_index(table, "timestamp");
    const int hz_col = detail::column_index(table, "hz");
    const int dev_col = detail::column_index(table, "mhz_dev");
    if (tcol < 0 || (hz_col < 0 && dev_col < 0))
        throw ParseError(path + ": header must contain 'timestamp' and 'hz' or 'mhz_dev'");
    if (table.rows.empty()) throw ParseError(path + ": no data rows");

    FrequencyTrace trace;
    std::int64_t prev_t = 0;
    bool first = true;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 2);
        if (static_cast<int>(row.size()) <= std::max(tcol, std::max(hz_col, dev_col)))
            throw ParseError(ctx + ": too few columns");
        const std::int64_t t = parse_iso8601(row[tcol]);
        const double value = hz_col >= 0 ? (parse_double(row[hz_col], ctx) - 50.0) * 1000.0
                                         : parse_double(row[dev_col], ctx);
        if (first) {
            trace.start_s = t;
            trace.dev_mhz.push_back(value);
            first = false;
        } else {
            const std::int64_t gap = t - prev_t;
            if (gap <= 0)
                throw ParseError(ctx + ": non-monotone timestamp " + row[tcol]);
            if (gap > max_gap_s)
                throw DataGapError(path + ": gap of " + std::to_string(gap) + " s before " +
                                   row[tcol] + " exceeds " + std::to_string(max_gap_s) + " s");
            const double hold = trace.dev_mhz.back();
            for (std::int64_t k = 1; k < gap; ++k) trace.dev_mhz.push_back(hold);
            trace.dev_mhz.push_back(value);
        }
        prev_t = t;
    }
    return trace;
}

// Imbalance CSV: 1-min rows `timestamp,indicator_eur_mwh,settlement_eur_mwh`;
// the settlement column must be constant within each quarter-hour.
inline ImbalancePriceSeries load_imbalance_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int tcol = detail::column_index(table, "timestamp");
    const int icol = detail::column_index(table, "indicator_eur_mwh");
    const int scol = detail::column_index(table, "settlement_eur_mwh");
    if (tcol < 0 || icol < 0 || scol < 0)
        throw ParseError(path +
                         ": header must contain timestamp,indicator_eur_mwh,settlement_eur_mwh");
    if (table.rows.empty()) throw ParseError(path + ": no data rows");

    ImbalancePriceSeries out;
    std::int64_t prev_t = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 2);
        if (static_cast<int>(row.size()) <= std::max(tcol, std::max(icol, scol)))
            throw ParseError(ctx + ": too few columns");
        const std::int64_t t = parse_iso8601(row[tcol]);
        if (r == 0) {
            if (t % kSecondsPerQuarter != 0)
                throw ValidationError(path + ": series must start on a quarter-hour");
            out.start_s = t;
        } else if (t != prev_t + kSecondsPerMinute) {
            throw DataGapError(path + ": expected " + format_iso8601(prev_t + kSecondsPerMinute) +
                               ", got " + row[tcol]);
        }
        prev_t = t;
        const double indicator = parse_double(row[icol], ctx);
        const double settlement = parse_double(row[scol], ctx);
        out.indicator_eur_mwh.push_back(indicator);
        const std::size_t minute = out.indicator_eur_mwh.size() - 1;
        if (minute % kMinutesPerQuarter == 0) {
            out.settlement_eur_mwh.push_back(settlement);
        } else if (settlement != out.settlement_eur_mwh.back()) {
            throw ParseError(ctx + ": settlement price changes within a quarter-hour");
        }
    }
    if (out.indicator_eur_mwh.size() % kMinutesPerQuarter != 0)
        throw ValidationError(path + ": series must cover whole quarter-hours");
    out.validate();
    return out;
}

// FCR CSV: rows `timestamp,price_eur_mw`, one per 4-h block.
inline FcrPriceSeries load_fcr_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int tcol = detail::column_index(table, "timestamp");
    const int pcol = detail::column_index(table, "price_eur_mw");
    if (tcol < 0 || pcol < 0)
        throw ParseError(path + ": header must contain timestamp,price_eur_mw");
    if (table.rows.empty()) throw ParseError(path + ": no data rows");

    FcrPriceSeries out;
    std::int64_t prev_t = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 2);
        if (static_cast<int>(row.size()) <= std::max(tcol, pcol))
            throw ParseError(ctx + ": too few columns");
        const std::int64_t t = parse_iso8601(row[tcol]);
        if (r == 0) {
            if (t % kSecondsPerBlock != 0)
                throw ValidationError(path + ": series must start on a 4-h block boundary");
            out.start_s = t;
        } else if (t != prev_t + kSecondsPerBlock) {
            throw DataGapError(path + ": expected " + format_iso8601(prev_t + kSecondsPerBlock) +
                               ", got " + row[tcol]);
        }
        prev_t = t;
        out.price_eur_mw.push_back(parse_double(row[pcol], ctx));
    }
    out.validate();
    return out;
}

inline MarketDataset load_dataset(const std::string& frequency_csv, const std::string& imbalance_csv,
                                  const std::string& fcr_csv) {
    return MarketDataset(load_frequency_csv(frequency_csv), load_imbalance_csv(imbalance_csv),
                         load_fcr_csv(fcr_csv));
}

inline void write_frequency_csv(const std::string& path, const FrequencyTrace& trace) {
    CsvWriter w(path);
    w.row({"timestamp", "mhz_dev"});
    for (std::size_t i = 0; i < trace.dev_mhz.size(); ++i)
        w.row({format_iso8601(trace.start_s + static_cast<std::int64_t>(i)),
               format_double(trace.dev_mhz[i])});
    w.close();
}

inline void write_imbalance_csv(const std::string& path, const ImbalancePriceSeries& series) {
    CsvWriter w(path);
    w.row({"timestamp", "indicator_eur_mwh", "settlement_eur_mwh"});
    for (std::size_t m = 0; m < series.indicator_eur_mwh.size(); ++m)
        w.row({format_iso8601(series.start_s + static_cast<std::int64_t>(m) * kSecondsPerMinute),
               format_double(series.indicator_eur_mwh[m]),
               format_double(series.settlement_eur_mwh[m / kMinutesPerQuarter])});
    w.close();
}

inline void write_fcr_csv(const std::string& path, const FcrPriceSeries& series) {
    CsvWriter w(path);
    w.row({"timestamp", "price_eur_mw"});
    for (std::size_t b = 0; b < series.price_eur_mw.size(); ++b)
        w.row({format_iso8601(series.start_s + static_cast<std::int64_t>(b) * kSecondsPerBlock),
               format_double(series.price_eur_mw[b])});
    w.close();
}

} // namespace fcrstack
