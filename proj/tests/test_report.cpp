#include <catch2/catch_amalgamated.hpp>

#include "fcrstack/report.hpp"
#include "fcrstack/schedule_io.hpp"
#include "test_util.hpp"

using namespace fcrstack;

TEST_CASE("schedule csv round trip") {
    testutil::TempDir tmp;
    BidSchedule sched;
    for (int b = 0; b < 6; ++b) sched.bids.push_back(FcrBid{b, (b * 3) % 10});
    const std::int64_t start = epoch_from_civil(2022, 1, 1);
    const auto path = tmp.file("schedule.csv");
    write_schedule_csv(path, sched, start);
    const LoadedSchedule loaded = read_schedule_csv(path);
    REQUIRE(loaded.start_s == start);
    REQUIRE(loaded.schedule.bids.size() == 6);
    for (int b = 0; b < 6; ++b) REQUIRE(loaded.schedule.bids[b].power_mw == (b * 3) % 10);

    SECTION("binding validates span and start") {
        testutil::DatasetBuilder b;
        b.n_blocks = 6;
        const MarketDataset ds = b.build();
        REQUIRE_NOTHROW(bind_schedule(loaded, ds, BatteryParams{}));
        testutil::DatasetBuilder shifted;
        shifted.n_blocks = 6;
        shifted.start_s = start + kSecondsPerBlock;
        REQUIRE_THROWS_AS(bind_schedule(loaded, shifted.build(), BatteryParams{}),
                          ValidationError);
        testutil::DatasetBuilder longer;
        longer.n_blocks = 12;
        REQUIRE_THROWS_AS(bind_schedule(loaded, longer.build(), BatteryParams{}), ValidationError);
    }
    SECTION("non-contiguous blocks are rejected") {
        testutil::write_file(tmp.file("bad.csv"),
                             "block_start,bid_mw,mean_j_adj,std_j_adj\n"
                             "2022-01-01T00:00:00Z,1,0,0\n"
                             "2022-01-01T08:00:00Z,2,0,0\n");
        REQUIRE_THROWS_AS(read_schedule_csv(tmp.file("bad.csv")), ValidationError);
    }
}

TEST_CASE("block price sigma") {
    SECTION("flat prices have zero spread") {
        testutil::DatasetBuilder b;
        b.settlement = [](std::int64_t) { return 77.0; };
        const MarketDataset ds = b.build();
        REQUIRE(block_price_sigma(ds, 0) == 0.0);
    }
    SECTION("alternating prices have their population spread") {
        testutil::DatasetBuilder b;
        b.settlement = [](std::int64_t q) { return q % 2 == 0 ? -100.0 : 100.0; };
        const MarketDataset ds = b.build();
        REQUIRE(block_price_sigma(ds, 0) == Catch::Approx(100.0));
    }
}

TEST_CASE("strategy labels") {
    REQUIRE(strategy_label(BidSchedule::uniform(4, 6)) == "uniform-4");
    BidSchedule mixed = BidSchedule::uniform(4, 6);
    mixed.bids[2].power_mw = 9;
    REQUIRE(strategy_label(mixed) == "non-uniform");
}

TEST_CASE("comparison rows keep the decomposition identity") {
    testutil::TempDir tmp;
    const std::string run = tmp.subdir("run1");
    testutil::write_file(run + "/metrics.csv",
                         "day,profit_eur,fcr_eur,imbalance_eur,cycles,overrides,violations\n"
                         "2022-01-26T00:00:00Z,150,100,50,0.8,0,0\n"
                         "TOTAL,150,100,50,0.8,0,0\n");
    write_schedule_csv(run + "/schedule.csv", BidSchedule::uniform(5, 6),
                       epoch_from_civil(2022, 1, 1));
    const RunSummary s = read_run_summary(run);
    REQUIRE(s.label == "uniform-5");
    REQUIRE(s.total_eur == s.fcr_eur + s.imbalance_eur);
    REQUIRE(s.cycles == 0.8);

    const auto out = tmp.file("comparison.csv");
    write_comparison_csv(out, {s});
    const CsvTable t = read_csv(out);
    REQUIRE(t.rows.size() == 1);
    REQUIRE(parse_double(t.rows[0][1], "total") ==
            parse_double(t.rows[0][2], "fcr") + parse_double(t.rows[0][3], "imb"));

    SECTION("missing artifacts are an error") {
        REQUIRE_THROWS_AS(read_run_summary(tmp.subdir("empty")), ValidationError);
    }
}

TEST_CASE("heatmap binning") {
    SECTION("high bids land in high-price bins") {
        // alternating schedule [9,0,9,0,...] under alternating capacity prices
        std::vector<HeatmapPoint> points;
        for (int b = 0; b < 12; ++b) {
            const bool high = b % 2 == 0;
            points.push_back({high ? 100.0 : 5.0, 10.0, high ? 9 : 0});
        }
        const auto cells = bin_heatmap(points, 5);
        REQUIRE(cells.size() == 2); // sigma axis is degenerate
        double low_mean = -1.0, high_mean = -1.0;
        for (const HeatmapCell& c : cells) {
            if (c.fcr_lo <= 5.0 && 5.0 <= c.fcr_hi) low_mean = c.mean_bid;
            if (c.fcr_lo <= 100.0 && 100.0 <= c.fcr_hi) high_mean = c.mean_bid;
        }
        REQUIRE(low_mean == Catch::Approx(0.0));
        REQUIRE(high_mean == Catch::Approx(9.0));
    }
    SECTION("fully degenerate axes collapse to one cell") {
        const auto cells = bin_heatmap({{20.0, 0.0, 3}, {20.0, 0.0, 5}}, 5);
        REQUIRE(cells.size() == 1);
        REQUIRE(cells[0].mean_bid == Catch::Approx(4.0));
        REQUIRE(cells[0].blocks == 2);
    }
    SECTION("empty input is rejected") {
        REQUIRE_THROWS_AS(bin_heatmap({}, 5), ValidationError);
    }
}

TEST_CASE("heatmap join from run artifacts") {
    testutil::TempDir tmp;
    const std::string run = tmp.subdir("stage1");
    const std::int64_t start = epoch_from_civil(2022, 1, 1);
    BidSchedule sched;
    for (int b = 0; b < 6; ++b) sched.bids.push_back(FcrBid{b, b % 2 == 0 ? 9 : 0});
    write_schedule_csv(run + "/schedule.csv", sched, start);

    testutil::DatasetBuilder b;
    b.n_blocks = 6;
    b.fcr_price = [](std::int64_t blk) { return blk % 2 == 0 ? 80.0 : 10.0; };
    b.settlement = [](std::int64_t q) { return static_cast<double>(q % 5); };
    write_block_stats_csv(run + "/block_stats.csv", b.build());

    const auto points = heatmap_points_from_run(run);
    REQUIRE(points.size() == 6);
    for (const HeatmapPoint& p : points)
        REQUIRE(p.bid_mw == (p.fcr_price == 80.0 ? 9 : 0));
}
