#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fcrstack/bid_optimizer.hpp"
#include "fcrstack/csv.hpp"
#include "fcrstack/ddqn.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/heuristic.hpp"
#include "fcrstack/market_data.hpp"
#include "fcrstack/rl_env.hpp"
#include "fcrstack/split.hpp"
#include "fcrstack/synth.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

// Sectioned key=value file. '#' and ';' start comments. Every key must be
// consumed by a typed getter; leftovers are reported as unknown keys so a
// typo fails the whole run up front.
class IniFile {
public:
    static IniFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    static IniFile parse_string(const std::string& text, const std::string& origin = "<config>") {
        IniFile ini;
        ini.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ParseError(origin + ":" + std::to_string(lineno) + ": bad section header");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw ParseError(origin + ":" + std::to_string(lineno) + ": empty section name");
                ini.values_[section]; // register even if empty
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw ParseError(origin + ":" + std::to_string(lineno) + ": key outside a section");
            if (!ini.values_[section].emplace(key, value).second)
                throw ParseError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                                 "' in [" + section + "]");
            continue;
        }
        return ini;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = values_.find(section);
        return s != values_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) {
        if (!has(section, key)) return fallback;
        consumed_.insert(section + "." + key);
        return values_.at(section).at(key);
    }

    std::string require_string(const std::string& section, const std::string& key) {
        if (!has(section, key))
            throw ValidationError(origin_ + ": missing required key '" + key + "' in [" + section +
                                  "]");
        consumed_.insert(section + "." + key);
        return values_.at(section).at(key);
    }

    double get_double(const std::string& section, const std::string& key, double fallback) {
        if (!has(section, key)) return fallback;
        return parse_double(get_string(section, key, ""), "[" + section + "] " + key);
    }

    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) {
        if (!has(section, key)) return fallback;
        return parse_int(get_string(section, key, ""), "[" + section + "] " + key);
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key, "");
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ValidationError(origin_ + ": [" + section + "] " + key + " must be a boolean, got '" +
                              v + "'");
    }

    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  std::vector<int> fallback) {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key, "");
        std::vector<int> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(static_cast<int>(parse_int(trim(item), "[" + section + "] " + key)));
        return out;
    }

    // Rejects any key no getter asked about and any section outside `known`.
    void finish(const std::set<std::string>& known_sections) const {
        std::vector<std::string> unknown;
        for (const auto& [section, kv] : values_) {
            if (!known_sections.count(section)) {
                unknown.push_back("[" + section + "]");
                continue;
            }
            for (const auto& [key, value] : kv)
                if (!consumed_.count(section + "." + key))
                    unknown.push_back("[" + section + "] " + key);
        }
        if (!unknown.empty()) {
            std::string msg = origin_ + ": unknown configuration entries:";
            for (const std::string& u : unknown) msg += " " + u;
            throw ValidationError(msg);
        }
    }

private:
    static std::string strip_comment(const std::string& s) {
        const std::size_t h = s.find_first_of("#;");
        return h == std::string::npos ? s : s.substr(0, h);
    }
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::set<std::string> consumed_;
};

struct DataConfig {
    bool synth = false;
    // file mode
    std::string frequency_csv;
    std::string imbalance_csv;
    std::string fcr_csv;
    // synthesis mode
    std::int64_t start_s = epoch_from_civil(2022, 1, 1);
    std::int64_t days = 1;
    OuParams ou;
    PriceSynthSpec prices;

    void validate() const {
        if (synth) {
            if (days <= 0) throw ValidationError("data: days must be > 0");
            if (start_s % kSecondsPerDay != 0)
                throw ValidationError("data: start must be midnight UTC");
            ou.validate();
            prices.validate();
        } else {
            if (frequency_csv.empty() || imbalance_csv.empty() || fcr_csv.empty())
                throw ValidationError(
                    "data: either set synth = true or provide frequency_csv, imbalance_csv and "
                    "fcr_csv");
        }
    }
};

struct RunConfig {
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int threads = 0; // 0 = all cores
    bool write_traces = false;
    std::string eval_split = "test";

    void validate() const {
        if (out_dir.empty()) throw ValidationError("run: out_dir must not be empty");
        if (threads < 0) throw ValidationError("run: threads must be >= 0");
        if (eval_split != "train" && eval_split != "validation" && eval_split != "test" &&
            eval_split != "all")
            throw ValidationError("run: eval_split must be train, validation, test or all");
    }
};

struct ExperimentConfig;
inline void set_master_seed(ExperimentConfig& cfg, std::uint64_t seed);

// Whole-experiment configuration; validated as a unit before any run starts.
struct ExperimentConfig {
    BatteryParams battery;
    FcrConfig fcr;
    HeuristicConfig heuristic;
    MonteCarloPlan mc;
    RewardConfig reward;
    EnvConfig env;
    TrainConfig train;
    DataConfig data;
    RunConfig run;

    void validate() const {
        battery.validate();
        fcr.validate();
        heuristic.validate();
        mc.validate();
        reward.validate();
        env.validate();
        train.validate();
        data.validate();
        run.validate();
    }

    static ExperimentConfig from_ini(IniFile ini) {
        ExperimentConfig c;

        c.battery.p_nom_mw = ini.get_double("battery", "p_nom_mw", c.battery.p_nom_mw);
        c.battery.e_cap_mwh = ini.get_double("battery", "e_cap_mwh", c.battery.e_cap_mwh);
        c.battery.eta_c = ini.get_double("battery", "eta_c", c.battery.eta_c);
        c.battery.eta_d = ini.get_double("battery", "eta_d", c.battery.eta_d);

        c.fcr.t_res_min = ini.get_double("fcr", "t_res_min", c.fcr.t_res_min);
        c.fcr.full_activation_mhz =
            ini.get_double("fcr", "full_activation_mhz", c.fcr.full_activation_mhz);
        c.fcr.dead_band_mhz = ini.get_double("fcr", "dead_band_mhz", c.fcr.dead_band_mhz);
        c.fcr.fcr_energy_settled =
            ini.get_bool("fcr", "fcr_energy_settled", c.fcr.fcr_energy_settled);

        c.heuristic.zone_low = ini.get_double("heuristic", "zone_low", c.heuristic.zone_low);
        c.heuristic.zone_high = ini.get_double("heuristic", "zone_high", c.heuristic.zone_high);
        c.heuristic.buy_percentile =
            ini.get_double("heuristic", "buy_percentile", c.heuristic.buy_percentile);
        c.heuristic.sell_percentile =
            ini.get_double("heuristic", "sell_percentile", c.heuristic.sell_percentile);
        c.heuristic.power_fraction =
            ini.get_double("heuristic", "power_fraction", c.heuristic.power_fraction);

        c.mc.n_draws = static_cast<int>(ini.get_int("mc", "n_draws", c.mc.n_draws));
        c.mc.include_boundaries =
            ini.get_bool("mc", "include_boundaries", c.mc.include_boundaries);

        c.reward.lambda_c = ini.get_double("reward", "lambda_c", c.reward.lambda_c);
        c.reward.c_max = ini.get_double("reward", "c_max", c.reward.c_max);
        c.reward.soe_margin_weight =
            ini.get_double("reward", "soe_margin_weight", c.reward.soe_margin_weight);
        c.reward.soe_violation_weight =
            ini.get_double("reward", "soe_violation_weight", c.reward.soe_violation_weight);
        c.reward.margin_threshold =
            ini.get_double("reward", "margin_threshold", c.reward.margin_threshold);
        c.reward.override_penalty =
            ini.get_double("reward", "override_penalty", c.reward.override_penalty);
        c.reward.gamma = ini.get_double("reward", "gamma", c.reward.gamma);

        c.env.episode_minutes = ini.get_int("env", "episode_minutes", c.env.episode_minutes);
        c.env.lookahead_min = ini.get_int("env", "lookahead_min", c.env.lookahead_min);
        c.env.price_norm = ini.get_double("env", "price_norm", c.env.price_norm);

        c.train.learning_rate = ini.get_double("train", "learning_rate", c.train.learning_rate);
        c.train.batch_size = static_cast<int>(ini.get_int("train", "batch_size", c.train.batch_size));
        c.train.epsilon_start = ini.get_double("train", "epsilon_start", c.train.epsilon_start);
        c.train.epsilon_end = ini.get_double("train", "epsilon_end", c.train.epsilon_end);
        c.train.epsilon_decay_steps =
            ini.get_int("train", "epsilon_decay_steps", c.train.epsilon_decay_steps);
        c.train.target_sync_period =
            ini.get_int("train", "target_sync_period", c.train.target_sync_period);
        c.train.update_every = ini.get_int("train", "update_every", c.train.update_every);
        c.train.gradient_steps = ini.get_int("train", "gradient_steps", c.train.gradient_steps);
        c.train.replay_capacity = static_cast<std::size_t>(
            ini.get_int("train", "replay_capacity", static_cast<std::int64_t>(c.train.replay_capacity)));
        c.train.replay_min = static_cast<std::size_t>(
            ini.get_int("train", "replay_min", static_cast<std::int64_t>(c.train.replay_min)));
        c.train.total_episodes = ini.get_int("train", "total_episodes", c.train.total_episodes);
        c.train.eval_every = ini.get_int("train", "eval_every", c.train.eval_every);
        c.train.hidden = ini.get_int_list("train", "hidden", c.train.hidden);
        c.train.huber_delta = ini.get_double("train", "huber_delta", c.train.huber_delta);
        c.train.reward_scale = ini.get_double("train", "reward_scale", c.train.reward_scale);

        c.data.synth = ini.get_bool("data", "synth", c.data.synth);
        c.data.frequency_csv = ini.get_string("data", "frequency_csv", "");
        c.data.imbalance_csv = ini.get_string("data", "imbalance_csv", "");
        c.data.fcr_csv = ini.get_string("data", "fcr_csv", "");
        if (ini.has("data", "start")) c.data.start_s = parse_iso8601(ini.require_string("data", "start"));
        c.data.days = ini.get_int("data", "days", c.data.days);
        c.data.ou.rate_per_s = ini.get_double("data", "ou_rate_per_s", c.data.ou.rate_per_s);
        c.data.ou.vol_mhz = ini.get_double("data", "ou_vol_mhz", c.data.ou.vol_mhz);
        c.data.ou.clamp_mhz = ini.get_double("data", "ou_clamp_mhz", c.data.ou.clamp_mhz);
        if (ini.has("data", "price_profile"))
            c.data.prices.profile = parse_price_profile(ini.require_string("data", "price_profile"));
        c.data.prices.level = ini.get_double("data", "price_level", c.data.prices.level);
        c.data.prices.amplitude = ini.get_double("data", "price_amplitude", c.data.prices.amplitude);
        c.data.prices.alternate_quarters =
            ini.get_int("data", "alternate_quarters", c.data.prices.alternate_quarters);
        c.data.prices.spike_every_quarters =
            ini.get_int("data", "spike_every_quarters", c.data.prices.spike_every_quarters);
        c.data.prices.indicator_noise_std =
            ini.get_double("data", "indicator_noise_std", c.data.prices.indicator_noise_std);
        c.data.prices.ar_coeff = ini.get_double("data", "ar_coeff", c.data.prices.ar_coeff);
        c.data.prices.ar_noise_std =
            ini.get_double("data", "ar_noise_std", c.data.prices.ar_noise_std);
        if (ini.has("data", "fcr_profile"))
            c.data.prices.fcr_profile = parse_price_profile(ini.require_string("data", "fcr_profile"));
        c.data.prices.fcr_level = ini.get_double("data", "fcr_level", c.data.prices.fcr_level);
        c.data.prices.fcr_amplitude =
            ini.get_double("data", "fcr_amplitude", c.data.prices.fcr_amplitude);
        c.data.prices.fcr_alternate_blocks =
            ini.get_int("data", "fcr_alternate_blocks", c.data.prices.fcr_alternate_blocks);

        c.run.out_dir = ini.get_string("run", "out_dir", c.run.out_dir);
        c.run.seed = static_cast<std::uint64_t>(
            ini.get_int("run", "seed", static_cast<std::int64_t>(c.run.seed)));
        c.run.threads = static_cast<int>(ini.get_int("run", "threads", c.run.threads));
        c.run.write_traces = ini.get_bool("run", "write_traces", c.run.write_traces);
        c.run.eval_split = ini.get_string("run", "eval_split", c.run.eval_split);

        ini.finish({"battery", "fcr", "heuristic", "mc", "reward", "env", "train", "data", "run"});
        set_master_seed(c, c.run.seed);
        c.validate();
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        return from_ini(IniFile::parse_file(path));
    }
};

// One master seed drives every stream: data synthesis, network init,
// exploration, replay sampling and episode starts.
inline void set_master_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.run.seed = seed;
    cfg.train.seed = seed;
    cfg.mc.seed = seed;
    cfg.env.seed = derive_seed(seed, 0xe8);
}

// Dataset per the config: deterministic synthesis or file ingestion.
inline MarketDataset build_dataset(const ExperimentConfig& cfg) {
    if (cfg.data.synth) {
        const std::int64_t n_seconds = cfg.data.days * kSecondsPerDay;
        FrequencyTrace freq =
            synth_frequency(cfg.data.start_s, n_seconds, derive_seed(cfg.run.seed, 0xf0e1),
                            cfg.data.ou);
        auto [imb, fcr] = synth_prices(cfg.data.start_s, cfg.data.days * kQuartersPerDay,
                                       derive_seed(cfg.run.seed, 0x9a1c), cfg.data.prices);
        return MarketDataset(std::move(freq), std::move(imb), std::move(fcr));
    }
    return load_dataset(cfg.data.frequency_csv, cfg.data.imbalance_csv, cfg.data.fcr_csv);
}

// Split of the dataset's whole covered days.
inline DatasetSplit dataset_split(const MarketDataset& ds) {
    if (ds.start_s() % kSecondsPerDay != 0)
        throw ValidationError("split: dataset must start at midnight UTC");
    if (ds.days() == 0) throw ValidationError("split: dataset covers no whole day");
    return chronological_split(ds.start_s(), ds.days());
}

// Buy/sell percentile thresholds from the training split's indicator prices;
// the whole span when the split has no training day.
inline PriceThresholds thresholds_from_dataset(const MarketDataset& ds,
                                               const HeuristicConfig& cfg) {
    std::vector<double> prices;
    if (ds.start_s() % kSecondsPerDay == 0 && ds.days() > 0) {
        const DatasetSplit split = dataset_split(ds);
        for (std::int64_t day : split.train) {
            const std::int64_t m0 = ds.minute_index(day);
            for (std::int64_t m = m0; m < m0 + kMinutesPerDay; ++m)
                prices.push_back(ds.indicator(m));
        }
    }
    if (prices.empty())
        for (std::int64_t m = 0; m < ds.minutes(); ++m) prices.push_back(ds.indicator(m));
    return compute_thresholds(prices, cfg);
}

} // namespace fcrstack
