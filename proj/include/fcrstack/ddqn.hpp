#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/nn.hpp"
#include "fcrstack/replay.hpp"
#include "fcrstack/rl_env.hpp"
#include "fcrstack/rng.hpp"
#include "fcrstack/safety.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

// Masked epsilon-greedy. Exploration is uniform over allowed actions; the
// greedy branch breaks ties toward the lowest action index.
inline EnvAction select_action(const MlpQNet& q, const Observation& obs, const ActionMask& mask,
                               double epsilon, std::mt19937_64& rng) {
    if (mask.count() == 0) throw ValidationError("select_action: all actions masked");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(rng) < epsilon) {
            std::vector<int> allowed;
            for (int a = 0; a < kActionCount; ++a)
                if (mask.allowed[static_cast<std::size_t>(a)]) allowed.push_back(a);
            std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
            return static_cast<EnvAction>(allowed[pick(rng)]);
        }
    }
    const std::vector<double> qv = q.q_values(obs.v.data());
    int best = -1;
    for (int a = 0; a < kActionCount; ++a) {
        if (!mask.allowed[static_cast<std::size_t>(a)]) continue;
        if (best < 0 || qv[static_cast<std::size_t>(a)] > qv[static_cast<std::size_t>(best)])
            best = a;
    }
    return static_cast<EnvAction>(best);
}

// Double-Q backup: the online network picks the next action among allowed
// ones, the target network prices it.
inline double ddqn_target(double reward, const Observation& next_obs, const ActionMask& next_mask,
                          bool done, const MlpQNet& q_online, const MlpQNet& q_target,
                          double gamma) {
    if (done) return reward;
    if (next_mask.count() == 0) throw ValidationError("ddqn_target: all next actions masked");
    const std::vector<double> q_on = q_online.q_values(next_obs.v.data());
    int best = -1;
    for (int a = 0; a < kActionCount; ++a) {
        if (!next_mask.allowed[static_cast<std::size_t>(a)]) continue;
        if (best < 0 || q_on[static_cast<std::size_t>(a)] > q_on[static_cast<std::size_t>(best)])
            best = a;
    }
    const std::vector<double> q_tg = q_target.q_values(next_obs.v.data());
    return reward + gamma * q_tg[static_cast<std::size_t>(best)];
}

struct TrainConfig {
    double learning_rate = 3e-4;
    int batch_size = 256;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::int64_t epsilon_decay_steps = 50000;
    std::int64_t target_sync_period = 1000; // gradient updates between syncs
    std::int64_t update_every = 1;          // env steps between update triggers
    std::int64_t gradient_steps = 1;        // updates per trigger
    std::size_t replay_capacity = 200000;
    std::size_t replay_min = 1000;
    std::int64_t total_episodes = 200;
    std::int64_t eval_every = 10;           // episodes between validation runs
    std::vector<int> hidden = {128, 128};
    double huber_delta = 10.0;
    double reward_scale = 0.01; // rewards are EUR-scale; bring targets near unit scale
    std::uint64_t seed = 1;

    void validate() const {
        if (!(learning_rate >= 0)) throw ValidationError("train: learning_rate must be >= 0");
        if (batch_size <= 0) throw ValidationError("train: batch_size must be > 0");
        if (!(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_end >= 0 && epsilon_end <= 1))
            throw ValidationError("train: epsilon must stay in [0, 1]");
        if (epsilon_decay_steps <= 0) throw ValidationError("train: epsilon_decay_steps must be > 0");
        if (target_sync_period < 1) throw ValidationError("train: target_sync_period must be >= 1");
        if (update_every < 1 || gradient_steps < 1)
            throw ValidationError("train: update cadence must be >= 1");
        if (replay_min < static_cast<std::size_t>(batch_size))
            throw ValidationError("train: replay_min must be >= batch_size");
        if (replay_capacity < replay_min) throw ValidationError("train: capacity < replay_min");
        if (total_episodes <= 0) throw ValidationError("train: total_episodes must be > 0");
        if (eval_every <= 0) throw ValidationError("train: eval_every must be > 0");
        if (!(huber_delta > 0)) throw ValidationError("train: huber_delta must be > 0");
        if (!(reward_scale > 0)) throw ValidationError("train: reward_scale must be > 0");
    }
};

struct EpisodeLog {
    std::int64_t episode;
    std::int64_t day_start_s;
    double epsilon;
    std::int64_t steps;
    double r_total, r_imb, r_soe, r_cycle, r_override;
    double profit_eur, fcr_eur, imbalance_eur;
    double cycles;
    int overrides, violations;
    double mean_loss;
};

struct EvalPoint {
    std::int64_t episode;
    double validation_profit_eur;
};

struct TrainingLog {
    std::vector<EpisodeLog> episodes;
    std::vector<EvalPoint> evals;

    void write_csv(const std::string& path) const {
        CsvWriter w(path);
        w.row({"kind", "episode", "day", "epsilon", "steps", "r_total", "r_imb", "r_soe",
               "r_cycle", "r_override", "profit_eur", "fcr_eur", "imbalance_eur", "cycles",
               "overrides", "violations", "mean_loss"});
        std::size_t ei = 0;
        for (const EpisodeLog& e : episodes) {
            w.row({"train", std::to_string(e.episode), format_iso8601(e.day_start_s),
                   format_double(e.epsilon), std::to_string(e.steps), format_double(e.r_total),
                   format_double(e.r_imb), format_double(e.r_soe), format_double(e.r_cycle),
                   format_double(e.r_override), format_double(e.profit_eur),
                   format_double(e.fcr_eur), format_double(e.imbalance_eur),
                   format_double(e.cycles), std::to_string(e.overrides),
                   std::to_string(e.violations), format_double(e.mean_loss)});
            while (ei < evals.size() && evals[ei].episode == e.episode) {
                w.row({"val", std::to_string(evals[ei].episode), "", "", "", "", "", "", "", "",
                       format_double(evals[ei].validation_profit_eur), "", "", "", "", "", ""});
                ++ei;
            }
        }
        w.close();
    }
};

struct DayMetrics {
    std::int64_t day_start_s = 0;
    double profit_eur = 0.0;
    double fcr_eur = 0.0;
    double imbalance_eur = 0.0;
    double cycles = 0.0;
    int overrides = 0;
    int violations = 0;
};

struct EvalReport {
    std::vector<DayMetrics> days;

    DayMetrics aggregate() const {
        DayMetrics sum;
        for (const DayMetrics& d : days) {
            sum.profit_eur += d.profit_eur;
            sum.fcr_eur += d.fcr_eur;
            sum.imbalance_eur += d.imbalance_eur;
            sum.cycles += d.cycles;
            sum.overrides += d.overrides;
            sum.violations += d.violations;
        }
        return sum;
    }

    void write_csv(const std::string& path) const {
        CsvWriter w(path);
        w.row({"day", "profit_eur", "fcr_eur", "imbalance_eur", "cycles", "overrides",
               "violations"});
        auto emit = [&](const std::string& label, const DayMetrics& m) {
            w.row({label, format_double(m.profit_eur), format_double(m.fcr_eur),
                   format_double(m.imbalance_eur), format_double(m.cycles),
                   std::to_string(m.overrides), std::to_string(m.violations)});
        };
        for (const DayMetrics& d : days) emit(format_iso8601(d.day_start_s), d);
        emit("TOTAL", aggregate());
        w.close();
    }
};

// Greedy rollouts (mask and override active) over a list of days.
inline EvalReport evaluate(const MlpQNet& q, Environment& env,
                           const std::vector<std::int64_t>& days,
                           const std::string& trace_dir = "") {
    EvalReport report;
    std::mt19937_64 rng(0); // unused at epsilon = 0
    for (std::int64_t day : days) {
        Observation obs = env.reset(day);
        bool done = false;
        while (!done) {
            const EnvAction a = select_action(q, obs, env.mask(), 0.0, rng);
            const StepOutcome out = env.step(a);
            obs = out.next;
            done = out.done;
        }
        DayMetrics m;
        m.day_start_s = day;
        m.profit_eur = env.ledger().total_cash();
        m.fcr_eur = env.ledger().fcr_cash();
        m.imbalance_eur = env.ledger().imbalance_cash();
        m.cycles = env.day_cycles();
        m.overrides = env.override_minutes();
        m.violations = env.boundary_violations();
        report.days.push_back(m);
        if (!trace_dir.empty()) {
            const std::string stamp = format_iso8601(day).substr(0, 10);
            env.write_trace_csv(trace_dir + "/trace_" + stamp + ".csv");
            env.ledger().write_csv(trace_dir + "/ledger_" + stamp + ".csv");
        }
    }
    return report;
}

// Supplies per-split environments and the day lists the trainer loops over.
struct EnvFactory {
    std::function<Environment()> make_train_env;
    std::function<Environment()> make_eval_env;
    std::vector<std::int64_t> train_days;
    std::vector<std::int64_t> validation_days;
};

struct TrainResult {
    MlpQNet net;             // snapshot with peak validation profit
    double best_validation_profit = -std::numeric_limits<double>::infinity();
    std::int64_t best_episode = -1;
    TrainingLog log;
};

// DDQN training loop: epsilon-greedy acting, uniform replay, double-Q Huber
// targets, periodic hard target sync, and model selection on peak validation
// profit. Fully deterministic for a fixed config.
inline TrainResult train(const EnvFactory& factory, const TrainConfig& cfg) {
    cfg.validate();
    if (factory.train_days.empty()) throw ValidationError("train: no training days");
    if (factory.validation_days.empty()) throw ValidationError("train: no validation days");

    Environment env = factory.make_train_env();
    Environment val_env = factory.make_eval_env();
    const double gamma = env.reward_config().gamma;

    MlpQNet online(Observation::kDim, kActionCount, cfg.hidden, derive_seed(cfg.seed, 0x11));
    MlpQNet target = online;
    AdamOptimizer adam(online.param_count(), cfg.learning_rate);
    ReplayBuffer replay(cfg.replay_capacity);
    std::mt19937_64 act_rng = make_rng(cfg.seed, 0x22);
    std::mt19937_64 sample_rng = make_rng(cfg.seed, 0x33);

    TrainResult result{online, -std::numeric_limits<double>::infinity(), -1, {}};

    auto epsilon_at = [&](std::int64_t step) {
        if (step >= cfg.epsilon_decay_steps) return cfg.epsilon_end;
        const double f = static_cast<double>(step) / static_cast<double>(cfg.epsilon_decay_steps);
        return cfg.epsilon_start + f * (cfg.epsilon_end - cfg.epsilon_start);
    };

    std::vector<double> grad(online.param_count(), 0.0);
    MlpQNet::Workspace ws;
    std::int64_t global_step = 0;
    std::int64_t updates = 0;

    auto run_validation = [&](std::int64_t episode) {
        double profit = 0.0;
        const EvalReport rep = evaluate(online, val_env, factory.validation_days);
        profit = rep.aggregate().profit_eur;
        result.log.evals.push_back({episode, profit});
        if (profit > result.best_validation_profit) {
            result.best_validation_profit = profit;
            result.best_episode = episode;
            result.net = online;
        }
    };

    for (std::int64_t ep = 0; ep < cfg.total_episodes; ++ep) {
        const std::int64_t day =
            factory.train_days[static_cast<std::size_t>(ep) % factory.train_days.size()];
        Observation obs = env.reset(day);
        ActionMask mask = env.mask();

        EpisodeLog elog{};
        elog.episode = ep;
        elog.day_start_s = day;
        elog.epsilon = epsilon_at(global_step);
        double loss_sum = 0.0;
        std::int64_t loss_count = 0;

        bool done = false;
        while (!done) {
            const double eps = epsilon_at(global_step);
            const EnvAction a = select_action(online, obs, mask, eps, act_rng);
            const StepOutcome out = env.step(a);
            const ActionMask next_mask = out.done ? ActionMask{} : env.mask();

            replay.push({obs, static_cast<int>(a), cfg.reward_scale * out.reward.total(), out.next,
                         next_mask, out.done});
            obs = out.next;
            mask = next_mask;
            done = out.done;

            elog.r_total += out.reward.total();
            elog.r_imb += out.reward.r_imb;
            elog.r_soe += out.reward.r_soe;
            elog.r_cycle += out.reward.r_cycle;
            elog.r_override += out.reward.r_override;
            ++elog.steps;
            ++global_step;

            if (replay.size() >= std::max(cfg.replay_min, static_cast<std::size_t>(cfg.batch_size)) &&
                global_step % cfg.update_every == 0) {
                for (std::int64_t g = 0; g < cfg.gradient_steps; ++g) {
                    const auto batch = replay.sample(static_cast<std::size_t>(cfg.batch_size),
                                                     sample_rng);
                    std::fill(grad.begin(), grad.end(), 0.0);
                    double loss = 0.0;
                    const double inv_batch = 1.0 / static_cast<double>(batch.size());
                    for (const Transition* tr : batch) {
                        const double y = ddqn_target(tr->reward, tr->next_obs, tr->next_mask,
                                                     tr->done, online, target, gamma);
                        online.forward(tr->obs.v.data(), ws);
                        const double diff = ws.act.back()[static_cast<std::size_t>(tr->action)] - y;
                        loss += huber_loss(diff, cfg.huber_delta) * inv_batch;
                        std::vector<double> dq(kActionCount, 0.0);
                        dq[static_cast<std::size_t>(tr->action)] =
                            huber_grad(diff, cfg.huber_delta) * inv_batch;
                        online.backward(ws, dq, grad);
                    }
                    if (!std::isfinite(loss))
                        throw SimulationError("train: loss diverged (non-finite)");
                    adam.step(online.parameters(), grad);
                    loss_sum += loss;
                    ++loss_count;
                    ++updates;
                    if (updates % cfg.target_sync_period == 0) target = online;
                }
            }
        }

        elog.profit_eur = env.ledger().total_cash();
        elog.fcr_eur = env.ledger().fcr_cash();
        elog.imbalance_eur = env.ledger().imbalance_cash();
        elog.cycles = env.day_cycles();
        elog.overrides = env.override_minutes();
        elog.violations = env.boundary_violations();
        elog.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        result.log.episodes.push_back(elog);

        if ((ep + 1) % cfg.eval_every == 0 || ep + 1 == cfg.total_episodes) run_validation(ep);
    }
    return result;
}

} // namespace fcrstack
