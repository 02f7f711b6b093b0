#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/fcr.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

// Single-price settlement of the net metered position: injection at positive
// prices earns, drawing at negative prices earns.
inline double settle_quarter_hour(double net_injected_mwh, double price_eur_mwh) {
    return net_injected_mwh * price_eur_mwh;
}

// Pay-as-cleared capacity remuneration for a full 4-h block.
inline double fcr_capacity_revenue(const FcrBid& bid, double clearing_price_eur_mw) {
    if (clearing_price_eur_mw < 0)
        throw ValidationError("fcr revenue: negative clearing price");
    return bid.power_mw * clearing_price_eur_mw;
}

// Block profit with the end-of-block energy shift priced at the next block's
// median settlement price, so candidates that deplete the battery are not
// favored over candidates that preserve it.
inline double adjusted_block_profit(double r_fcr, double pi_imb, double delta_e_mwh,
                                    double pi_bar_next) {
    return r_fcr + pi_imb + pi_bar_next * delta_e_mwh;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw ValidationError("median of empty range");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Per-candidate financial outcome of one simulated block.
struct BlockEvaluation {
    double r_fcr = 0.0;
    double pi_imb = 0.0;
    double delta_e_mwh = 0.0;
    double pi_bar_next = 0.0;
    double j_adj = 0.0;
    int violation_count = 0; // seconds with SoE outside the reserve band

    static BlockEvaluation make(double r_fcr, double pi_imb, double delta_e, double pi_bar_next,
                                int violations = 0) {
        BlockEvaluation ev;
        ev.r_fcr = r_fcr;
        ev.pi_imb = pi_imb;
        ev.delta_e_mwh = delta_e;
        ev.pi_bar_next = pi_bar_next;
        ev.j_adj = adjusted_block_profit(r_fcr, pi_imb, delta_e, pi_bar_next);
        ev.violation_count = violations;
        return ev;
    }
};

// Cash ledger of one simulation run: quarter-hour imbalance entries plus
// per-block capacity revenue entries.
class Ledger {
public:
    struct QuarterEntry {
        std::int64_t t_s;
        double energy_mwh; // net injected
        double price_eur_mwh;
        double cash_eur;
    };
    struct FcrEntry {
        std::int64_t t_s;
        int bid_mw;
        double price_eur_mw;
        double cash_eur;
    };

    void add_quarter(std::int64_t t_s, double net_injected_mwh, double price_eur_mwh) {
        quarters_.push_back(
            {t_s, net_injected_mwh, price_eur_mwh, settle_quarter_hour(net_injected_mwh, price_eur_mwh)});
    }

    void add_fcr(std::int64_t t_s, const FcrBid& bid, double clearing_price_eur_mw) {
        fcr_.push_back({t_s, bid.power_mw, clearing_price_eur_mw,
                        fcr_capacity_revenue(bid, clearing_price_eur_mw)});
    }

    double imbalance_cash() const {
        double sum = 0.0;
        for (const auto& q : quarters_) sum += q.cash_eur;
        return sum;
    }

    double fcr_cash() const {
        double sum = 0.0;
        for (const auto& f : fcr_) sum += f.cash_eur;
        return sum;
    }

    double total_cash() const { return imbalance_cash() + fcr_cash(); }

    const std::vector<QuarterEntry>& quarters() const { return quarters_; }
    const std::vector<FcrEntry>& fcr_entries() const { return fcr_; }

    void clear() {
        quarters_.clear();
        fcr_.clear();
    }

    void write_csv(const std::string& path) const {
        CsvWriter w(path);
        w.row({"timestamp", "category", "energy_mwh", "price", "cash_eur"});
        std::size_t qi = 0, fi = 0;
        while (qi < quarters_.size() || fi < fcr_.size()) {
            const bool take_fcr = fi < fcr_.size() &&
                                  (qi >= quarters_.size() || fcr_[fi].t_s <= quarters_[qi].t_s);
            if (take_fcr) {
                const auto& f = fcr_[fi++];
                w.row({format_iso8601(f.t_s), "fcr_capacity", format_double(f.bid_mw),
                       format_double(f.price_eur_mw), format_double(f.cash_eur)});
            } else {
                const auto& q = quarters_[qi++];
                w.row({format_iso8601(q.t_s), "imbalance", format_double(q.energy_mwh),
                       format_double(q.price_eur_mwh), format_double(q.cash_eur)});
            }
        }
        w.close();
    }

private:
    std::vector<QuarterEntry> quarters_;
    std::vector<FcrEntry> fcr_;
};

} // namespace fcrstack
