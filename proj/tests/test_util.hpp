#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fcrstack/market_data.hpp"
#include "fcrstack/timeutil.hpp"

namespace testutil {

// Hand-built aligned dataset: per-second frequency, per-quarter settlement
// (indicator previews it exactly) and per-block capacity prices.
struct DatasetBuilder {
    std::int64_t start_s = fcrstack::epoch_from_civil(2022, 1, 1);
    std::int64_t n_blocks = 1;
    std::function<double(std::int64_t)> freq_dev = [](std::int64_t) { return 0.0; };
    std::function<double(std::int64_t)> settlement = [](std::int64_t) { return 0.0; };
    std::function<double(std::int64_t)> fcr_price = [](std::int64_t) { return 0.0; };
    // minute indicator; by default the settlement value of the quarter
    std::function<double(std::int64_t)> indicator;

    fcrstack::MarketDataset build() const {
        using namespace fcrstack;
        FrequencyTrace freq;
        freq.start_s = start_s;
        const std::int64_t secs = n_blocks * kSecondsPerBlock;
        freq.dev_mhz.resize(static_cast<std::size_t>(secs));
        for (std::int64_t s = 0; s < secs; ++s)
            freq.dev_mhz[static_cast<std::size_t>(s)] = freq_dev(s);

        ImbalancePriceSeries imb;
        imb.start_s = start_s;
        const std::int64_t quarters = n_blocks * kQuartersPerBlock;
        imb.settlement_eur_mwh.resize(static_cast<std::size_t>(quarters));
        for (std::int64_t q = 0; q < quarters; ++q)
            imb.settlement_eur_mwh[static_cast<std::size_t>(q)] = settlement(q);
        imb.indicator_eur_mwh.resize(static_cast<std::size_t>(quarters * kMinutesPerQuarter));
        for (std::int64_t m = 0; m < quarters * kMinutesPerQuarter; ++m)
            imb.indicator_eur_mwh[static_cast<std::size_t>(m)] =
                indicator ? indicator(m)
                          : imb.settlement_eur_mwh[static_cast<std::size_t>(m / kMinutesPerQuarter)];

        FcrPriceSeries fcr;
        fcr.start_s = start_s;
        fcr.price_eur_mw.resize(static_cast<std::size_t>(n_blocks));
        for (std::int64_t b = 0; b < n_blocks; ++b)
            fcr.price_eur_mw[static_cast<std::size_t>(b)] = fcr_price(b);

        return MarketDataset(std::move(freq), std::move(imb), std::move(fcr));
    }
};

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("fcrstack_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }
    std::string subdir(const std::string& name) const {
        auto p = path_ / name;
        std::filesystem::create_directories(p);
        return p.string();
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace testutil
