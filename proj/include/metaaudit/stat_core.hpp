#pragma once

// Numeric kernels shared by every other module: the standard normal
// distribution, p-value recovery from ratio estimates, order-statistic
// quantiles and multiple-testing arithmetic. Everything here is pure.

#include <cstdint>
#include <span>
#include <string>

namespace metaaudit {

/// Smallest p-value ever reported; applied before any -log10 transform.
inline constexpr double kMinPValue = 1e-300;

/// A ratio-scale effect (risk ratio, odds ratio, ...) with its confidence
/// limits. Use make_effect() to get a validated value.
struct EffectEstimate {
    std::string label;
    double rr = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    double level = 0.95;

    friend bool operator==(const EffectEstimate&, const EffectEstimate&) = default;
};

/// Checks 0 < ci_low <= rr <= ci_high and 0 < level < 1. Throws
/// ValidationError naming the offending field.
void validate(const EffectEstimate& e);

EffectEstimate make_effect(std::string label, double rr, double ci_low, double ci_high,
                           double level = 0.95);

struct BackCalcResult {
    double log_effect = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p = 1.0;  // two-sided, in [kMinPValue, 1]
};

/// Standard normal CDF. Throws ValidationError on non-finite input.
double normal_cdf(double x);

/// Upper tail 1 - normal_cdf(x), computed without cancellation.
double normal_sf(double x);

/// Inverse of normal_cdf on (0,1).
double normal_quantile(double q);

/// Two-sided critical value for a confidence level, e.g. 0.95 -> 1.959964.
double z_critical(double level);

/// Two-sided p-value for a z statistic, clamped to [kMinPValue, 1].
double two_sided_p(double z);

/// -log10(p) after clamping p at kMinPValue.
double neg_log10(double p);

/// Recovers z and p from a ratio estimate and its CI using the log-scale
/// normal approximation se = (ln U - ln L) / (2 z_crit(level)).
BackCalcResult p_from_estimate(const EffectEstimate& e);

/// Sample quantile with plotting position h = (n+1)q and linear
/// interpolation between neighbouring order statistics (Hyndman-Fan type 6).
/// Positions outside [1, n] clamp to the extremes.
double quantile_type6(std::span<const double> values, double q);

/// Probability of at least one false positive among n independent tests,
/// 1 - (1 - alpha)^n.
double fwer(std::int64_t n, double alpha);

struct BonferroniLine {
    double threshold = 0.0;
    double neg_log10 = 0.0;
};

BonferroniLine bonferroni_line(double alpha, std::int64_t m);

}  // namespace metaaudit
