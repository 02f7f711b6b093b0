#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "fcrstack/errors.hpp"

namespace fcrstack {

// All timestamps are UTC epoch seconds. The market grid is fixed:
// 1 s physics, 1 min decisions, 15 min settlement, 4 h capacity blocks.
inline constexpr std::int64_t kSecondsPerMinute = 60;
inline constexpr std::int64_t kMinutesPerQuarter = 15;
inline constexpr std::int64_t kSecondsPerQuarter = 900;
inline constexpr std::int64_t kQuartersPerBlock = 16;
inline constexpr std::int64_t kMinutesPerBlock = 240;
inline constexpr std::int64_t kSecondsPerBlock = 14400;
inline constexpr std::int64_t kBlocksPerDay = 6;
inline constexpr std::int64_t kMinutesPerDay = 1440;
inline constexpr std::int64_t kQuartersPerDay = 96;
inline constexpr std::int64_t kSecondsPerDay = 86400;

struct CivilDate {
    int year;
    int month; // 1..12
    int day;   // 1..31
};

// Days since 1970-01-01 for a proleptic Gregorian date.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);           // [0, 399]
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1; // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;          // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline std::int64_t epoch_from_civil(int y, int mo, int d, int h = 0, int mi = 0, int s = 0) {
    return days_from_civil(y, mo, d) * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

inline std::int64_t day_start(std::int64_t t) {
    std::int64_t d = t / kSecondsPerDay;
    if (t < 0 && t % kSecondsPerDay != 0) --d;
    return d * kSecondsPerDay;
}

inline CivilDate civil_of(std::int64_t t) { return civil_from_days(day_start(t) / kSecondsPerDay); }

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS" or "YYYY-MM-DDTHH:MM:SS",
// optionally suffixed with "Z". Anything else is a ParseError.
inline std::int64_t parse_iso8601(const std::string& text) {
    std::string s = text;
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = 0;
    int n = 0;
    if (s.size() >= 19) {
        n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &sec);
        if (n != 7 || (sep != 'T' && sep != ' '))
            throw ParseError("bad timestamp: '" + text + "'");
    } else {
        n = std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &mo, &d);
        if (n != 3 || s.size() != 10) throw ParseError("bad timestamp: '" + text + "'");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
        throw ParseError("bad timestamp: '" + text + "'");
    return epoch_from_civil(y, mo, d, h, mi, sec);
}

inline std::string format_iso8601(std::int64_t t) {
    const CivilDate cd = civil_of(t);
    const std::int64_t rem = t - day_start(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", cd.year, cd.month, cd.day,
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

} // namespace fcrstack
