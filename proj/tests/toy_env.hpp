#pragma once

// Two-price toy world shared by the agent tests and the acceptance suite:
// settlement alternates between -amp and +amp per quarter-hour, the indicator
// previews it exactly, frequency is dead flat and capacity prices are zero,
// so the whole game is masked storage arbitrage over the residual power.

#include <cstdint>
#include <vector>

#include "fcrstack/bid_optimizer.hpp"
#include "fcrstack/ddqn.hpp"
#include "fcrstack/market_data.hpp"
#include "fcrstack/rl_env.hpp"
#include "fcrstack/split.hpp"
#include "test_util.hpp"

namespace testutil {

struct ToyWorld {
    fcrstack::MarketDataset ds;
    fcrstack::BatteryParams params;
    fcrstack::FcrConfig fcr_cfg;
    fcrstack::RewardConfig reward_cfg;
    fcrstack::EnvConfig env_cfg;
    fcrstack::BidSchedule schedule;
    std::vector<std::int64_t> train_days;
    std::vector<std::int64_t> validation_days;
    std::vector<std::int64_t> test_days;

    fcrstack::Environment make_env(bool uniform_init) const {
        fcrstack::EnvConfig cfg = env_cfg;
        cfg.uniform_init = uniform_init;
        return fcrstack::Environment(ds, schedule, params, fcr_cfg, reward_cfg, cfg);
    }

    fcrstack::EnvFactory factory() const {
        fcrstack::EnvFactory f;
        f.make_train_env = [this]() {
            fcrstack::Environment env = make_env(true);
            env.set_allowed_days(train_days);
            return env;
        };
        f.make_eval_env = [this]() {
            fcrstack::Environment env = make_env(false);
            env.set_allowed_days({}); // evaluation may visit any covered day
            return env;
        };
        f.train_days = train_days;
        f.validation_days = validation_days;
        return f;
    }
};

inline ToyWorld make_toy_world(int n_days, double amplitude = 100.0,
                               std::int64_t episode_minutes = fcrstack::kMinutesPerBlock,
                               std::uint64_t env_seed = 7) {
    using namespace fcrstack;
    DatasetBuilder b;
    b.n_blocks = n_days * kBlocksPerDay;
    b.settlement = [amplitude](std::int64_t q) {
        return (q % 2 == 0 ? -amplitude : amplitude);
    };
    ToyWorld w{b.build(),
               BatteryParams{10.0, 20.0, 0.9, 0.9},
               FcrConfig{25.0, 200.0, 0.0, false},
               RewardConfig{},
               EnvConfig{},
               BidSchedule::uniform(0, static_cast<std::size_t>(n_days) * kBlocksPerDay),
               {},
               {},
               {}};
    // pure-cash reward so the exact dynamic program is the profit oracle
    w.reward_cfg.lambda_c = 0.0;
    w.reward_cfg.soe_margin_weight = 0.0;
    w.reward_cfg.soe_violation_weight = 0.0;
    w.reward_cfg.override_penalty = 0.0;
    w.reward_cfg.gamma = 0.99;
    w.env_cfg.episode_minutes = episode_minutes;
    w.env_cfg.seed = env_seed;
    w.env_cfg.price_norm = 2.0 * amplitude;

    const DatasetSplit split = chronological_split(w.ds.start_s(), n_days);
    w.train_days = split.train;
    w.validation_days = split.validation;
    w.test_days = split.test;
    return w;
}

} // namespace testutil
