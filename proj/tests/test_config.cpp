#include <catch2/catch_amalgamated.hpp>

#include "fcrstack/config.hpp"
#include "test_util.hpp"

using namespace fcrstack;

namespace {

const char* kMinimalSynthConfig = R"ini(
# synthetic two-day experiment
[data]
synth = true
days = 2
start = 2022-01-01
price_profile = stochastic

[run]
out_dir = out
seed = 7
)ini";

} // namespace

TEST_CASE("ini parsing basics") {
    IniFile ini = IniFile::parse_string("[a]\nx = 1\ny = hello ; trailing\n[b]\nz = 2.5\n");
    REQUIRE(ini.get_int("a", "x", 0) == 1);
    REQUIRE(ini.get_string("a", "y", "") == "hello");
    REQUIRE(ini.get_double("b", "z", 0.0) == 2.5);
    REQUIRE(ini.get_int("a", "missing", 42) == 42);
    ini.finish({"a", "b"});
}

TEST_CASE("ini rejects malformed input") {
    REQUIRE_THROWS_AS(IniFile::parse_string("[a\nx = 1\n"), ParseError);
    REQUIRE_THROWS_AS(IniFile::parse_string("x = 1\n"), ParseError);       // key outside section
    REQUIRE_THROWS_AS(IniFile::parse_string("[a]\nnovalue\n"), ParseError);
    REQUIRE_THROWS_AS(IniFile::parse_string("[a]\nx = 1\nx = 2\n"), ParseError); // duplicate
}

TEST_CASE("unknown keys and sections are rejected as a whole") {
    SECTION("unknown key") {
        IniFile ini = IniFile::parse_string("[a]\nx = 1\nrogue = 2\n");
        ini.get_int("a", "x", 0);
        REQUIRE_THROWS_MATCHES(ini.finish({"a"}), ValidationError,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("rogue")));
    }
    SECTION("unknown section") {
        IniFile ini = IniFile::parse_string("[mystery]\nx = 1\n");
        REQUIRE_THROWS_AS(ini.finish({"a"}), ValidationError);
    }
    SECTION("typo in an experiment config") {
        std::string text = kMinimalSynthConfig;
        text += "\n[battery]\np_nom = 10\n"; // correct key is p_nom_mw
        REQUIRE_THROWS_MATCHES(ExperimentConfig::from_ini(IniFile::parse_string(text)),
                               ValidationError,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("p_nom")));
    }
}

TEST_CASE("experiment config defaults and overrides") {
    const ExperimentConfig cfg = ExperimentConfig::from_ini(IniFile::parse_string(kMinimalSynthConfig));
    REQUIRE(cfg.battery.p_nom_mw == 10.0);
    REQUIRE(cfg.battery.e_cap_mwh == 20.0);
    REQUIRE(cfg.fcr.t_res_min == 25.0);
    REQUIRE(cfg.mc.n_draws == 50);
    REQUIRE(cfg.reward.c_max == 1.15);
    REQUIRE(cfg.data.days == 2);
    REQUIRE(cfg.run.seed == 7);
    REQUIRE(cfg.train.seed == 7); // master seed propagates
    REQUIRE(cfg.train.hidden == std::vector<int>{128, 128});

    SECTION("hidden layer list parses") {
        std::string text = kMinimalSynthConfig;
        text += "\n[train]\nhidden = 64, 32\n";
        const ExperimentConfig c = ExperimentConfig::from_ini(IniFile::parse_string(text));
        REQUIRE(c.train.hidden == std::vector<int>{64, 32});
    }
    SECTION("invalid values fail validation as a whole") {
        std::string text = kMinimalSynthConfig;
        text += "\n[battery]\neta_c = 1.5\n";
        REQUIRE_THROWS_AS(ExperimentConfig::from_ini(IniFile::parse_string(text)), ValidationError);
    }
    SECTION("file mode requires all three paths") {
        const char* text = "[data]\nsynth = false\nfrequency_csv = f.csv\n[run]\nout_dir = o\n";
        REQUIRE_THROWS_AS(ExperimentConfig::from_ini(IniFile::parse_string(text)), ValidationError);
    }
}

TEST_CASE("synthetic dataset from a config is deterministic") {
    const ExperimentConfig cfg =
        ExperimentConfig::from_ini(IniFile::parse_string(kMinimalSynthConfig));
    const MarketDataset a = build_dataset(cfg);
    const MarketDataset b = build_dataset(cfg);
    REQUIRE(a.days() == 2);
    REQUIRE(a.frequency().dev_mhz == b.frequency().dev_mhz);
    REQUIRE(a.imbalance().indicator_eur_mwh == b.imbalance().indicator_eur_mwh);
    REQUIRE(a.fcr().price_eur_mw == b.fcr().price_eur_mw);

    ExperimentConfig other = cfg;
    set_master_seed(other, 8);
    const MarketDataset c = build_dataset(other);
    REQUIRE(a.frequency().dev_mhz != c.frequency().dev_mhz);
}

TEST_CASE("thresholds come from the training split when it exists") {
    // 22 days: days 1-20 train, 21-22 validation. Make validation prices
    // extreme so leaking them would shift the thresholds.
    testutil::DatasetBuilder b;
    b.n_blocks = 22 * kBlocksPerDay;
    b.settlement = [](std::int64_t q) {
        const std::int64_t day = q / kQuartersPerDay;
        if (day >= 20) return 100000.0;
        return q % 2 == 0 ? -100.0 : 100.0;
    };
    const MarketDataset ds = b.build();
    HeuristicConfig hcfg;
    const PriceThresholds thr = thresholds_from_dataset(ds, hcfg);
    REQUIRE(thr.buy_eur_mwh == Catch::Approx(-100.0));
    REQUIRE(thr.sell_eur_mwh == Catch::Approx(100.0));
}
