#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fcrstack/errors.hpp"
#include "fcrstack/timeutil.hpp"

namespace fcrstack {

enum class SplitKind { train, validation, test };

// Per-month day partition: days 1-20 train, 21-25 validation, rest test.
inline SplitKind split_of_day(int day_of_month) {
    if (day_of_month <= 20) return SplitKind::train;
    if (day_of_month <= 25) return SplitKind::validation;
    return SplitKind::test;
}

struct DatasetSplit {
    std::vector<std::int64_t> train;      // day-start epochs, ascending
    std::vector<std::int64_t> validation;
    std::vector<std::int64_t> test;

    const std::vector<std::int64_t>& days(SplitKind kind) const {
        switch (kind) {
        case SplitKind::train: return train;
        case SplitKind::validation: return validation;
        default: return test;
        }
    }

    bool contains(SplitKind kind, std::int64_t day_start_s) const {
        const auto& d = days(kind);
        return std::binary_search(d.begin(), d.end(), day_start_s);
    }
};

inline DatasetSplit chronological_split(std::int64_t start_s, std::int64_t n_days) {
    if (start_s % kSecondsPerDay != 0)
        throw ValidationError("split: span must start at midnight UTC");
    if (n_days <= 0) throw ValidationError("split: empty span");
    DatasetSplit split;
    for (std::int64_t i = 0; i < n_days; ++i) {
        const std::int64_t day = start_s + i * kSecondsPerDay;
        switch (split_of_day(civil_of(day).day)) {
        case SplitKind::train: split.train.push_back(day); break;
        case SplitKind::validation: split.validation.push_back(day); break;
        case SplitKind::test: split.test.push_back(day); break;
        }
    }
    return split;
}

} // namespace fcrstack
