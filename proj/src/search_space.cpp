#include "metaaudit/search_space.hpp"

#include "metaaudit/errors.hpp"
#include "metaaudit/stat_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace metaaudit {

namespace {

std::string who(const StudyCounts& c) {
    return "citation " + std::to_string(c.citation);
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const StudyCounts& c) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw OverflowError(who(c) + ": search space exceeds 64-bit range");
    }
    return out;
}

FiveNumber five_number(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, quantile_type6(v, 0.25), quantile_type6(v, 0.5), quantile_type6(v, 0.75), *hi};
}

}  // namespace

void validate(const StudyCounts& c) {
    if (c.outcomes < 1) throw ValidationError(who(c) + ": outcomes must be >= 1");
    if (c.predictors < 1) throw ValidationError(who(c) + ": predictors must be >= 1");
    if (c.lags < 1) throw ValidationError(who(c) + ": lags must be >= 1");
    if (c.covariates < 0) throw ValidationError(who(c) + ": covariates must be >= 0");
    if (c.covariates > kMaxCovariates) {
        throw OverflowError(who(c) + ": covariates must be <= " + std::to_string(kMaxCovariates));
    }
}

SearchSpace compute_space(const StudyCounts& c) {
    validate(c);
    SearchSpace s;
    s.space1 = checked_mul(checked_mul(static_cast<std::uint64_t>(c.outcomes),
                                       static_cast<std::uint64_t>(c.predictors), c),
                           static_cast<std::uint64_t>(c.lags), c);
    s.space2 = std::uint64_t{1} << c.covariates;
    s.space3 = checked_mul(s.space1, s.space2, c);
    return s;
}

SpaceSummary summarize_spaces(std::span<const SearchSpace> spaces) {
    if (spaces.empty()) throw ValidationError("summarize_spaces: no studies");
    std::vector<double> s1, s2, s3;
    s1.reserve(spaces.size());
    s2.reserve(spaces.size());
    s3.reserve(spaces.size());
    for (const auto& s : spaces) {
        s1.push_back(static_cast<double>(s.space1));
        s2.push_back(static_cast<double>(s.space2));
        s3.push_back(static_cast<double>(s.space3));
    }
    return {spaces.size(), five_number(s1), five_number(s2), five_number(s3)};
}

std::int64_t round_half_up(double v) {
    return static_cast<std::int64_t>(std::floor(v + 0.5));
}

}  // namespace metaaudit
