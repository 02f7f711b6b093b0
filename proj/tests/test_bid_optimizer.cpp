#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fcrstack/bid_optimizer.hpp"
#include "test_util.hpp"

using namespace fcrstack;

namespace {
BatteryParams reference_params() { return BatteryParams{10.0, 20.0, 0.9, 0.9}; }
FcrConfig reference_fcr() { return FcrConfig{25.0, 200.0, 0.0, false}; }
} // namespace

TEST_CASE("initial SoE draws stratify the feasible band") {
    const BatteryParams bp = reference_params();
    const FcrConfig cfg = reference_fcr();

    SECTION("two draws at zero bid are the raw capacity bounds") {
        MonteCarloPlan plan;
        plan.n_draws = 2;
        const auto draws = draw_initial_soe(FcrBid{0, 0}, plan, bp, cfg);
        REQUIRE(draws == std::vector<double>{0.0, 20.0});
    }
    SECTION("four draws at bid 5 spread evenly including the bounds") {
        MonteCarloPlan plan;
        plan.n_draws = 4;
        const auto draws = draw_initial_soe(FcrBid{0, 5}, plan, bp, cfg);
        const double lo = 5.0 * 25.0 / 60.0;
        const double hi = 20.0 - lo;
        REQUIRE(draws.size() == 4);
        REQUIRE(draws[0] == Catch::Approx(lo).margin(1e-12));
        REQUIRE(draws[1] == Catch::Approx(lo + (hi - lo) / 3.0).margin(1e-12));
        REQUIRE(draws[2] == Catch::Approx(lo + 2.0 * (hi - lo) / 3.0).margin(1e-12));
        REQUIRE(draws[3] == Catch::Approx(hi).margin(1e-12));
    }
    SECTION("fifty draws include both boundary points exactly") {
        MonteCarloPlan plan;
        const auto draws = draw_initial_soe(FcrBid{0, 7}, plan, bp, cfg);
        const SoeBounds b = soe_bounds(FcrBid{0, 7}, cfg, bp);
        REQUIRE(draws.size() == 50);
        REQUIRE(draws.front() == b.lo_mwh);
        REQUIRE(draws.back() == b.hi_mwh);
    }
    SECTION("same plan twice produces identical draws") {
        MonteCarloPlan plan;
        REQUIRE(draw_initial_soe(FcrBid{0, 3}, plan, bp, cfg) ==
                draw_initial_soe(FcrBid{0, 3}, plan, bp, cfg));
    }
    SECTION("interior-only mode uses stratum centers") {
        MonteCarloPlan plan;
        plan.n_draws = 2;
        plan.include_boundaries = false;
        const auto draws = draw_initial_soe(FcrBid{0, 0}, plan, bp, cfg);
        REQUIRE(draws[0] == Catch::Approx(5.0));
        REQUIRE(draws[1] == Catch::Approx(15.0));
    }
    SECTION("boundary mode requires at least two draws") {
        MonteCarloPlan plan;
        plan.n_draws = 1;
        REQUIRE_THROWS_AS(draw_initial_soe(FcrBid{0, 0}, plan, bp, cfg), ValidationError);
    }
}

TEST_CASE("select_bid picks the highest mean adjusted profit") {
    auto candidate = [](std::initializer_list<double> js) {
        std::vector<BlockEvaluation> evals;
        for (double j : js) evals.push_back(BlockEvaluation::make(j, 0.0, 0.0, 0.0));
        return evals;
    };

    SECTION("single candidate") {
        REQUIRE(select_bid({candidate({1.0, 2.0})}) == 0);
    }
    SECTION("clear winner") {
        std::vector<std::vector<BlockEvaluation>> evals;
        for (int k = 0; k < 10; ++k) evals.push_back(candidate({k == 3 ? 50.0 : 0.0}));
        REQUIRE(select_bid(evals) == 3);
    }
    SECTION("ties break toward the lower bid") {
        std::vector<std::vector<BlockEvaluation>> evals;
        for (int k = 0; k < 10; ++k) evals.push_back(candidate({7.0, 7.0}));
        REQUIRE(select_bid(evals) == 0);
    }
    SECTION("empty and ragged inputs are rejected") {
        REQUIRE_THROWS_AS(select_bid({}), ValidationError);
        REQUIRE_THROWS_AS(select_bid({candidate({1.0}), candidate({1.0, 2.0})}), ValidationError);
    }
}

TEST_CASE("simulate_block") {
    const BatteryParams bp = reference_params();
    const FcrConfig cfg = reference_fcr();
    HeuristicConfig hcfg;

    SECTION("nothing happens on a dead trace with zero prices") {
        testutil::DatasetBuilder b;
        const MarketDataset ds = b.build();
        const BlockView view = BlockView::of_block(ds, 0);
        // thresholds that never trigger on a flat zero price
        const PriceThresholds thr{-1.0, 1.0};
        const BlockEvaluation ev =
            simulate_block(FcrBid{0, 0}, 10.0, view, thr, hcfg, bp, cfg);
        REQUIRE(ev.j_adj == 0.0);
        REQUIRE(ev.delta_e_mwh == 0.0);
        REQUIRE(ev.pi_imb == 0.0);
        REQUIRE(ev.violation_count == 0);
    }

    SECTION("charge-only run books a cost now and a terminal credit") {
        testutil::DatasetBuilder b;
        b.settlement = [](std::int64_t) { return 100.0; };
        const MarketDataset ds = b.build();
        const BlockView view = BlockView::of_block(ds, 0);
        const PriceThresholds always_buy{1e9, 2e9};
        Ledger ledger;
        const BlockEvaluation ev =
            simulate_block(FcrBid{0, 0}, 0.0, view, always_buy, hcfg, bp, cfg, nullptr, &ledger);
        REQUIRE(ev.pi_imb < 0.0);
        REQUIRE(ev.delta_e_mwh > 0.0);
        REQUIRE(ev.pi_bar_next * ev.delta_e_mwh > 0.0);
        REQUIRE(ledger.imbalance_cash() == Catch::Approx(ev.pi_imb));
        REQUIRE(ev.j_adj == Catch::Approx(ev.r_fcr + ev.pi_imb + ev.pi_bar_next * ev.delta_e_mwh));
    }

    SECTION("capacity revenue is bid times clearing price regardless of trace") {
        testutil::DatasetBuilder b;
        b.freq_dev = [](std::int64_t s) { return s % 2 == 0 ? -150.0 : 90.0; };
        b.settlement = [](std::int64_t q) { return q % 2 == 0 ? -40.0 : 40.0; };
        b.fcr_price = [](std::int64_t) { return 20.0; };
        const MarketDataset ds = b.build();
        const BlockEvaluation ev = simulate_block(FcrBid{0, 5}, 10.0, ds.blocks() == 1
                                                      ? BlockView::of_block(ds, 0)
                                                      : BlockView{},
                                                  PriceThresholds{-40.0, 40.0}, hcfg, bp, cfg);
        REQUIRE(ev.r_fcr == 100.0);
    }

    SECTION("ledger recomputation from the second-level trace matches") {
        testutil::DatasetBuilder b;
        b.freq_dev = [](std::int64_t s) { return 80.0 * std::sin(s / 700.0); };
        b.settlement = [](std::int64_t q) { return q % 2 == 0 ? -80.0 : 120.0; };
        b.fcr_price = [](std::int64_t) { return 15.0; };
        const MarketDataset ds = b.build();
        const BlockView view = BlockView::of_block(ds, 0);
        std::vector<SecondSample> trace;
        const double e0 = 9.0;
        const FcrBid bid{0, 4};
        const BlockEvaluation ev = simulate_block(bid, e0, view, PriceThresholds{-80.0, 120.0},
                                                  hcfg, bp, cfg, &trace);
        REQUIRE(trace.size() == static_cast<std::size_t>(kSecondsPerBlock));

        // independent re-integration of the settled position
        double pi = 0.0;
        double quarter_energy = 0.0;
        for (std::size_t s = 0; s < trace.size(); ++s) {
            quarter_energy += trace[s].p_imb_mw / 3600.0;
            if ((s + 1) % kSecondsPerQuarter == 0) {
                pi += quarter_energy * ds.settlement(static_cast<std::int64_t>(s) / kSecondsPerQuarter);
                quarter_energy = 0.0;
            }
        }
        REQUIRE(ev.pi_imb == Catch::Approx(pi).epsilon(1e-9));
        REQUIRE(ev.delta_e_mwh == Catch::Approx(trace.back().soe_mwh - e0).margin(1e-12));
        REQUIRE(ev.r_fcr == Catch::Approx(4.0 * 15.0));
    }

    SECTION("activation energy enters the position only when flagged") {
        testutil::DatasetBuilder b;
        b.freq_dev = [](std::int64_t) { return -200.0; }; // sustained full discharge
        b.settlement = [](std::int64_t) { return 100.0; };
        const MarketDataset ds = b.build();
        const BlockView view = BlockView::of_block(ds, 0);
        const PriceThresholds never{-1e9, 1e9}; // no opportunistic trigger
        // bid 1 drains slowly enough that the corrective zone stays quiet
        const FcrBid bid{0, 1};

        FcrConfig neutral = cfg; // default: activation is settlement-neutral
        const BlockEvaluation off =
            simulate_block(bid, 10.0, view, never, hcfg, bp, neutral);
        REQUIRE(off.pi_imb == 0.0);
        REQUIRE(off.delta_e_mwh < 0.0); // energy left through the droop

        FcrConfig settled = cfg;
        settled.fcr_energy_settled = true;
        const BlockEvaluation on =
            simulate_block(bid, 10.0, view, never, hcfg, bp, settled);
        REQUIRE(on.pi_imb > 0.0); // injected at a positive price
        REQUIRE(on.pi_imb == Catch::Approx(1.0 * 4.0 * 100.0)); // 1 MW for 4 h at 100
    }

    SECTION("misaligned slices are rejected") {
        testutil::DatasetBuilder b;
        const MarketDataset ds = b.build();
        BlockView bad = BlockView::of_block(ds, 0);
        bad.start_s += 30;
        REQUIRE_THROWS_AS(simulate_block(FcrBid{0, 0}, 10.0, bad, PriceThresholds{0, 1},
                                         HeuristicConfig{}, bp, cfg),
                          ValidationError);
    }
}

TEST_CASE("optimize_schedule on crafted scenarios") {
    const BatteryParams bp = reference_params();
    const FcrConfig cfg = reference_fcr();
    HeuristicConfig hcfg;
    MonteCarloPlan plan;
    plan.n_draws = 6; // keep the unit test quick; acceptance runs the full 50

    SECTION("a huge capacity price pushes the bid to the cap") {
        testutil::DatasetBuilder b;
        b.settlement = [](std::int64_t) { return 100.0; };
        b.fcr_price = [](std::int64_t) { return 1000.0; };
        const MarketDataset ds = b.build();
        const PriceThresholds thr{100.0, 100.0 + 1e-9};
        const OptimizeResult res = optimize_schedule(ds, plan, bp, cfg, hcfg, thr);
        REQUIRE(res.schedule.bids.size() == 1);
        REQUIRE(res.schedule.bids[0].power_mw == 9);
    }

    SECTION("free capacity price and strong arbitrage push the bid to zero") {
        testutil::DatasetBuilder b;
        b.settlement = [](std::int64_t q) { return q % 2 == 0 ? -200.0 : 200.0; };
        b.fcr_price = [](std::int64_t) { return 0.0; };
        const MarketDataset ds = b.build();
        const PriceThresholds thr{-200.0, 200.0};
        const OptimizeResult res = optimize_schedule(ds, plan, bp, cfg, hcfg, thr);
        REQUIRE(res.schedule.bids[0].power_mw == 0);
    }

    SECTION("identical blocks get identical bids and stats") {
        testutil::DatasetBuilder b;
        b.n_blocks = 2;
        b.settlement = [](std::int64_t q) { return (q % kQuartersPerBlock) % 2 == 0 ? -50.0 : 50.0; };
        b.fcr_price = [](std::int64_t) { return 30.0; };
        const MarketDataset ds = b.build();
        const PriceThresholds thr{-50.0, 50.0};
        const OptimizeResult res = optimize_schedule(ds, plan, bp, cfg, hcfg, thr);
        REQUIRE(res.schedule.bids.size() == 2);
        REQUIRE(res.schedule.bids[0].power_mw == res.schedule.bids[1].power_mw);
        for (std::size_t k = 0; k < res.stats[0].size(); ++k) {
            REQUIRE(res.stats[0][k].mean_j_adj == Catch::Approx(res.stats[1][k].mean_j_adj));
            REQUIRE(res.stats[0][k].std_j_adj == Catch::Approx(res.stats[1][k].std_j_adj));
        }
    }

    SECTION("selected bids dominate every candidate mean per block") {
        testutil::DatasetBuilder b;
        b.n_blocks = 2;
        b.freq_dev = [](std::int64_t s) { return 60.0 * std::sin(s / 450.0); };
        b.settlement = [](std::int64_t q) { return 30.0 * ((q * 7919) % 11) - 150.0; };
        b.fcr_price = [](std::int64_t blk) { return blk == 0 ? 120.0 : 5.0; };
        const MarketDataset ds = b.build();
        const PriceThresholds thr{-90.0, 60.0};
        const OptimizeResult res = optimize_schedule(ds, plan, bp, cfg, hcfg, thr);
        for (std::size_t blk = 0; blk < res.stats.size(); ++blk) {
            const double chosen_mean =
                res.stats[blk][static_cast<std::size_t>(res.schedule.bids[blk].power_mw)].mean_j_adj;
            for (const CandidateStats& c : res.stats[blk]) REQUIRE(chosen_mean >= c.mean_j_adj);
        }
    }

    SECTION("runs are reproducible and thread-count independent") {
        testutil::DatasetBuilder b;
        b.freq_dev = [](std::int64_t s) { return 40.0 * std::cos(s / 333.0); };
        b.settlement = [](std::int64_t q) { return q % 3 == 0 ? -120.0 : 60.0; };
        b.fcr_price = [](std::int64_t) { return 25.0; };
        const MarketDataset ds = b.build();
        const PriceThresholds thr{-120.0, 60.0};
        const OptimizeResult a = optimize_schedule(ds, plan, bp, cfg, hcfg, thr, 1);
        const OptimizeResult c = optimize_schedule(ds, plan, bp, cfg, hcfg, thr, 4);
        REQUIRE(a.schedule.bids.size() == c.schedule.bids.size());
        for (std::size_t i = 0; i < a.schedule.bids.size(); ++i)
            REQUIRE(a.schedule.bids[i].power_mw == c.schedule.bids[i].power_mw);
        for (std::size_t blk = 0; blk < a.stats.size(); ++blk)
            for (std::size_t k = 0; k < a.stats[blk].size(); ++k)
                REQUIRE(a.stats[blk][k].mean_j_adj == c.stats[blk][k].mean_j_adj);
    }
}

TEST_CASE("candidate set excludes the nominal rating") {
    REQUIRE(max_candidate_bid(reference_params()) == 9);
    BatteryParams p = reference_params();
    p.p_nom_mw = 4.0;
    REQUIRE(max_candidate_bid(p) == 3);
}
