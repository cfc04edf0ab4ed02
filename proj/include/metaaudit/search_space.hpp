#pragma once

// Analysis search spaces: how many statistical tests a single study could
// have run given its outcomes, predictors, covariates and lags.
//
//   space1 = outcomes * predictors * lags     (questions at issue)
//   space2 = 2^covariates                     (covariate in/out models)
//   space3 = space1 * space2

#include <cstdint>
#include <span>
#include <string>

namespace metaaudit {

inline constexpr int kMaxCovariates = 62;

struct StudyCounts {
    std::int64_t citation = 0;
    std::string author;
    std::int64_t outcomes = 1;
    std::int64_t predictors = 1;
    std::int64_t covariates = 0;
    std::int64_t lags = 1;

    friend bool operator==(const StudyCounts&, const StudyCounts&) = default;
};

/// Throws ValidationError for zero/negative counts and OverflowError for
/// covariates > kMaxCovariates.
void validate(const StudyCounts& c);

struct SearchSpace {
    std::uint64_t space1 = 1;
    std::uint64_t space2 = 1;
    std::uint64_t space3 = 1;

    friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

/// Exact integer evaluation; throws OverflowError if any product leaves
/// 64-bit range.
SearchSpace compute_space(const StudyCounts& c);

struct FiveNumber {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

struct SpaceSummary {
    std::size_t n = 0;
    FiveNumber space1;
    FiveNumber space2;
    FiveNumber space3;
};

/// Min / type-6 quartiles / max of each space column.
SpaceSummary summarize_spaces(std::span<const SearchSpace> spaces);

/// Display convention for summary rows: round half up to an integer.
std::int64_t round_half_up(double v);

}  // namespace metaaudit
