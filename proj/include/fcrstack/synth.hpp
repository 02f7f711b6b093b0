#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "fcrstack/errors.hpp"
#include "fcrstack/market_data.hpp"
#include "fcrstack/rng.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

// Mean-reverting deviation process around 0 mHz; stationary std is
// volatility / sqrt(2 * rate).
struct OuParams {
    double rate_per_s = 1.0 / 300.0;  // mean reversion
    double vol_mhz = 1.6;             // diffusion scale per sqrt(s)
    double clamp_mhz = 200.0;

    void validate() const {
        if (!(rate_per_s > 0)) throw ValidationError("ou: rate must be > 0");
        if (!(vol_mhz >= 0)) throw ValidationError("ou: volatility must be >= 0");
        if (!(clamp_mhz > 0)) throw ValidationError("ou: clamp must be > 0");
    }
};

inline FrequencyTrace synth_frequency(std::int64_t start_s, std::int64_t n_seconds,
                                      std::uint64_t seed, const OuParams& params) {
    params.validate();
    if (n_seconds <= 0) throw ValidationError("synth_frequency: empty duration");
    FrequencyTrace trace;
    trace.start_s = start_s;
    trace.dev_mhz.resize(static_cast<std::size_t>(n_seconds));
    std::mt19937_64 rng = make_rng(seed, 0x0ff1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double x = 0.0;
    for (std::int64_t i = 0; i < n_seconds; ++i) {
        trace.dev_mhz[static_cast<std::size_t>(i)] = x;
        x += -params.rate_per_s * x + params.vol_mhz * (params.vol_mhz > 0 ? gauss(rng) : 0.0);
        x = std::clamp(x, -params.clamp_mhz, params.clamp_mhz);
    }
    return trace;
}

enum class PriceProfile { flat, alternating, spiky, stochastic };

inline PriceProfile parse_price_profile(const std::string& s) {
    if (s == "flat") return PriceProfile::flat;
    if (s == "alternating") return PriceProfile::alternating;
    if (s == "spiky") return PriceProfile::spiky;
    if (s == "stochastic") return PriceProfile::stochastic;
    throw ValidationError("unknown price profile '" + s + "'");
}

struct PriceSynthSpec {
    PriceProfile profile = PriceProfile::flat;
    double level = 100.0;                // base settlement price
    double amplitude = 100.0;            // alternating / spiky swing
    std::int64_t alternate_quarters = 1; // alternation period
    std::int64_t spike_every_quarters = 8;
    double indicator_noise_std = 0.0;    // 0 = indicator equals settlement
    double ar_coeff = 0.9;               // stochastic profile
    double ar_noise_std = 40.0;

    PriceProfile fcr_profile = PriceProfile::flat;
    double fcr_level = 20.0;
    double fcr_amplitude = 0.0;
    std::int64_t fcr_alternate_blocks = 1;

    void validate() const {
        if (alternate_quarters <= 0) throw ValidationError("prices: alternate_quarters must be > 0");
        if (spike_every_quarters <= 0)
            throw ValidationError("prices: spike_every_quarters must be > 0");
        if (indicator_noise_std < 0) throw ValidationError("prices: noise std must be >= 0");
        if (fcr_alternate_blocks <= 0)
            throw ValidationError("prices: fcr_alternate_blocks must be > 0");
        if (fcr_level < 0 || fcr_level - std::abs(fcr_amplitude) < 0)
            throw ValidationError("prices: FCR price pattern must stay >= 0");
        if (fcr_profile == PriceProfile::spiky || fcr_profile == PriceProfile::stochastic)
            throw ValidationError("prices: fcr profile must be flat or alternating");
    }
};

// Settlement prices per quarter plus a noisy 1-min preview of them.
inline std::pair<ImbalancePriceSeries, FcrPriceSeries> synth_prices(std::int64_t start_s,
                                                                    std::int64_t n_quarters,
                                                                    std::uint64_t seed,
                                                                    const PriceSynthSpec& spec) {
    spec.validate();
    if (n_quarters <= 0 || n_quarters % kQuartersPerBlock != 0)
        throw ValidationError("synth_prices: duration must cover whole 4-h blocks");

    ImbalancePriceSeries imb;
    imb.start_s = start_s;
    imb.settlement_eur_mwh.resize(static_cast<std::size_t>(n_quarters));

    std::mt19937_64 rng = make_rng(seed, 0x5e77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double ar = 0.0;
    for (std::int64_t q = 0; q < n_quarters; ++q) {
        double v = spec.level;
        switch (spec.profile) {
        case PriceProfile::flat:
            break;
        case PriceProfile::alternating:
            v += ((q / spec.alternate_quarters) % 2 == 0 ? -1.0 : 1.0) * spec.amplitude;
            break;
        case PriceProfile::spiky:
            if (q % spec.spike_every_quarters == 0) v += spec.amplitude;
            break;
        case PriceProfile::stochastic:
            ar = spec.ar_coeff * ar + spec.ar_noise_std * gauss(rng);
            v += ar;
            break;
        }
        imb.settlement_eur_mwh[static_cast<std::size_t>(q)] = v;
    }

    std::mt19937_64 noise_rng = make_rng(seed, 0x1d1c);
    const std::int64_t n_minutes = n_quarters * kMinutesPerQuarter;
    imb.indicator_eur_mwh.resize(static_cast<std::size_t>(n_minutes));
    for (std::int64_t m = 0; m < n_minutes; ++m) {
        const double base = imb.settlement_eur_mwh[static_cast<std::size_t>(m / kMinutesPerQuarter)];
        const double noise =
            spec.indicator_noise_std > 0 ? spec.indicator_noise_std * gauss(noise_rng) : 0.0;
        imb.indicator_eur_mwh[static_cast<std::size_t>(m)] = base + noise;
    }

    FcrPriceSeries fcr;
    fcr.start_s = start_s;
    const std::int64_t n_blocks = n_quarters / kQuartersPerBlock;
    fcr.price_eur_mw.resize(static_cast<std::size_t>(n_blocks));
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        double v = spec.fcr_level;
        if (spec.fcr_profile == PriceProfile::alternating)
            v += ((b / spec.fcr_alternate_blocks) % 2 == 0 ? -1.0 : 1.0) * spec.fcr_amplitude;
        fcr.price_eur_mw[static_cast<std::size_t>(b)] = v;
    }

    imb.validate();
    fcr.validate();
    return {std::move(imb), std::move(fcr)};
}

} // namespace fcrstack
