// Experiment driver: data synthesis, Stage-1 bid optimization, Stage-2
// training, evaluation and report generation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcrstack/config.hpp"
#include "fcrstack/ddqn.hpp"
#include "fcrstack/report.hpp"
#include "fcrstack/schedule_io.hpp"

namespace fs = std::filesystem;
using namespace fcrstack;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::int64_t> seed;
};

ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
    if (!args.out_dir.empty()) cfg.run.out_dir = args.out_dir;
    if (args.seed) set_master_seed(cfg, static_cast<std::uint64_t>(*args.seed));
    return cfg;
}

std::string ensure_out_dir(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.run.out_dir);
    return cfg.run.out_dir;
}

std::vector<std::int64_t> split_days(const MarketDataset& ds, const std::string& which) {
    if (which == "all") {
        std::vector<std::int64_t> days;
        for (std::int64_t d = 0; d < ds.days(); ++d)
            days.push_back(ds.start_s() + d * kSecondsPerDay);
        return days;
    }
    const DatasetSplit split = dataset_split(ds);
    const SplitKind kind = which == "train"        ? SplitKind::train
                           : which == "validation" ? SplitKind::validation
                                                   : SplitKind::test;
    return split.days(kind);
}

void cmd_synth(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    if (!cfg.data.synth)
        throw ValidationError("synth: the config must set [data] synth = true");
    const std::string out = ensure_out_dir(cfg);
    const MarketDataset ds = build_dataset(cfg);
    write_frequency_csv(out + "/frequency.csv", ds.frequency());
    write_imbalance_csv(out + "/imbalance.csv", ds.imbalance());
    write_fcr_csv(out + "/fcr.csv", ds.fcr());
    std::cout << "synth: wrote " << ds.days() << " day(s) (" << ds.blocks() << " blocks) to "
              << out << "\n";
}

void cmd_optimize_bids(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const std::string out = ensure_out_dir(cfg);
    const MarketDataset ds = build_dataset(cfg);
    const PriceThresholds thresholds = thresholds_from_dataset(ds, cfg.heuristic);
    const OptimizeResult result = optimize_schedule(ds, cfg.mc, cfg.battery, cfg.fcr,
                                                    cfg.heuristic, thresholds, cfg.run.threads);
    write_schedule_csv(out + "/schedule.csv", result.schedule, ds.start_s(), &result.stats);
    write_candidates_csv(out + "/candidates.csv", result.stats, ds.start_s());
    write_block_stats_csv(out + "/block_stats.csv", ds);
    double total = 0.0;
    for (std::size_t b = 0; b < result.schedule.bids.size(); ++b)
        total +=
            result.stats[b][static_cast<std::size_t>(result.schedule.bids[b].power_mw)].mean_j_adj;
    std::cout << "optimize-bids: " << result.schedule.bids.size()
              << " blocks, expected adjusted profit " << format_double(total) << " EUR, wrote "
              << out << "/schedule.csv\n";
}

EnvFactory make_factory(const MarketDataset& ds, const BidSchedule& schedule,
                        const ExperimentConfig& cfg) {
    const DatasetSplit split = dataset_split(ds);
    EnvFactory factory;
    factory.train_days = split.train;
    factory.validation_days = split.validation;
    factory.make_train_env = [&ds, schedule, cfg, split]() {
        EnvConfig ecfg = cfg.env;
        ecfg.uniform_init = true;
        Environment env(ds, schedule, cfg.battery, cfg.fcr, cfg.reward, ecfg);
        env.set_allowed_days(split.train);
        return env;
    };
    factory.make_eval_env = [&ds, schedule, cfg]() {
        EnvConfig ecfg = cfg.env;
        ecfg.uniform_init = false;
        return Environment(ds, schedule, cfg.battery, cfg.fcr, cfg.reward, ecfg);
    };
    return factory;
}

void cmd_train(const CommonArgs& args, const std::string& schedule_path) {
    const ExperimentConfig cfg = load_config(args);
    const std::string out = ensure_out_dir(cfg);
    const MarketDataset ds = build_dataset(cfg);
    const BidSchedule schedule = bind_schedule(read_schedule_csv(schedule_path), ds, cfg.battery);
    const TrainResult result = train(make_factory(ds, schedule, cfg), cfg.train);
    result.net.save(out + "/checkpoint.ckpt");
    result.log.write_csv(out + "/training_log.csv");
    std::cout << "train: " << cfg.train.total_episodes << " episodes, best validation profit "
              << format_double(result.best_validation_profit) << " EUR (episode "
              << result.best_episode << "), wrote " << out << "/checkpoint.ckpt\n";
}

void cmd_evaluate(const CommonArgs& args, const std::string& schedule_path,
                  const std::string& checkpoint_path) {
    const ExperimentConfig cfg = load_config(args);
    const std::string out = ensure_out_dir(cfg);
    const MarketDataset ds = build_dataset(cfg);
    const LoadedSchedule loaded = read_schedule_csv(schedule_path);
    const BidSchedule schedule = bind_schedule(loaded, ds, cfg.battery);
    const MlpQNet net = MlpQNet::load(checkpoint_path);
    if (net.input_dim() != Observation::kDim)
        throw ValidationError("checkpoint expects " + std::to_string(net.input_dim()) +
                              " observation inputs, the environment produces " +
                              std::to_string(Observation::kDim));

    const std::vector<std::int64_t> days = split_days(ds, cfg.run.eval_split);
    if (days.empty())
        throw ValidationError("evaluate: the '" + cfg.run.eval_split +
                              "' split has no day in this dataset");

    Environment env(ds, schedule, cfg.battery, cfg.fcr, cfg.reward, cfg.env);
    std::string trace_dir;
    if (cfg.run.write_traces) {
        trace_dir = out + "/traces";
        fs::create_directories(trace_dir);
    }
    const EvalReport report = evaluate(net, env, days, trace_dir);
    report.write_csv(out + "/metrics.csv");
    write_schedule_csv(out + "/schedule.csv", schedule, ds.start_s());
    const DayMetrics total = report.aggregate();
    std::cout << "evaluate: " << days.size() << " day(s), profit "
              << format_double(total.profit_eur) << " EUR (fcr " << format_double(total.fcr_eur)
              << ", imbalance " << format_double(total.imbalance_eur) << "), cycles "
              << format_double(total.cycles) << ", wrote " << out << "/metrics.csv\n";
}

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<RunSummary> runs;
    std::vector<HeatmapPoint> points;
    for (const std::string& dir : run_dirs) {
        const bool has_metrics = fs::exists(fs::path(dir) / "metrics.csv") &&
                                 fs::exists(fs::path(dir) / "schedule.csv");
        const bool has_stats = fs::exists(fs::path(dir) / "block_stats.csv") &&
                               fs::exists(fs::path(dir) / "schedule.csv");
        if (!has_metrics && !has_stats)
            throw ValidationError("run directory " + dir +
                                  " has neither evaluation metrics nor block stats");
        if (has_metrics) runs.push_back(read_run_summary(dir));
        if (has_stats) {
            const auto p = heatmap_points_from_run(dir);
            points.insert(points.end(), p.begin(), p.end());
        }
    }
    if (runs.empty()) throw ValidationError("report: no evaluated run among the inputs");
    write_comparison_csv(out_dir + "/comparison.csv", runs);
    std::cout << "report: " << runs.size() << " strategy row(s) -> " << out_dir
              << "/comparison.csv\n";
    if (!points.empty()) {
        write_heatmap_csv(out_dir + "/heatmap.csv", bin_heatmap(points, 5));
        std::cout << "report: " << points.size() << " block(s) -> " << out_dir << "/heatmap.csv\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Battery value stacking: non-uniform FCR bidding with real-time "
                 "imbalance control"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string schedule_path;
    std::string checkpoint_path;
    std::vector<std::string> run_dirs;
    std::string report_out = "report";

    auto add_common = [&](CLI::App* cmd, bool need_config = true) {
        auto* opt = cmd->add_option("--config", common.config_path, "experiment config file");
        if (need_config) opt->required();
        cmd->add_option("--out", common.out_dir, "output directory (overrides [run] out_dir)");
        cmd->add_option("--seed", common.seed, "master seed (overrides [run] seed)");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic market data files");
    add_common(synth);

    CLI::App* optimize =
        app.add_subcommand("optimize-bids", "select per-block FCR bids by Monte-Carlo rollout");
    add_common(optimize);

    CLI::App* train_cmd = app.add_subcommand("train", "train the DDQN imbalance controller");
    add_common(train_cmd);
    train_cmd->add_option("--schedule", schedule_path, "bid schedule CSV")->required();

    CLI::App* eval_cmd = app.add_subcommand("evaluate", "greedy evaluation of a checkpoint");
    add_common(eval_cmd);
    eval_cmd->add_option("--schedule", schedule_path, "bid schedule CSV")->required();
    eval_cmd->add_option("--checkpoint", checkpoint_path, "q-network checkpoint")->required();

    CLI::App* report_cmd =
        app.add_subcommand("report", "comparison and bid heatmap across evaluated runs");
    report_cmd->add_option("runs", run_dirs, "run directories")->required();
    report_cmd->add_option("--out", report_out, "report output directory");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) cmd_synth(common);
        if (optimize->parsed()) cmd_optimize_bids(common);
        if (train_cmd->parsed()) cmd_train(common, schedule_path);
        if (eval_cmd->parsed()) cmd_evaluate(common, schedule_path, checkpoint_path);
        if (report_cmd->parsed()) cmd_report(run_dirs, report_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
