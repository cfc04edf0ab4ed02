#include "metaaudit/stat_core.hpp"

#include "metaaudit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace metaaudit {

namespace {

std::string describe(const EffectEstimate& e) {
    return e.label.empty() ? std::string("effect estimate") : "effect '" + e.label + "'";
}

// Wichura, AS 241 (PPND16), lower half only: q in (0, 0.5].
double ppnd16_lower(double q) {
    const double dq = q - 0.5;
    if (std::abs(dq) <= 0.425) {
        const double r = 0.180625 - dq * dq;
        const double num =
            (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                  67265.770927008700853) * r + 45921.953931549871457) * r +
                13731.693765509461125) * r + 1971.5909503065514427) * r +
              133.14166789178437745) * r + 3.387132872796366608);
        const double den =
            (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                  39307.89580009271061) * r + 21213.794301586595867) * r +
                5394.1960214247511077) * r + 687.1870074920579083) * r +
              42.313330701600911252) * r + 1.0);
        return dq * num / den;
    }
    double r = std::sqrt(-std::log(q));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                  0.24178072517745061177) * r + 1.27045825245236838258) * r +
                3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                  0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                  1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
        x = num / den;
    }
    return -x;
}

}  // namespace

void validate(const EffectEstimate& e) {
    const auto who = describe(e);
    if (!std::isfinite(e.rr) || !std::isfinite(e.ci_low) || !std::isfinite(e.ci_high)) {
        throw ValidationError(who + ": non-finite value");
    }
    if (e.rr <= 0.0) throw ValidationError(who + ": rr must be positive");
    if (e.ci_low <= 0.0) throw ValidationError(who + ": ci_low must be positive");
    if (e.ci_high <= 0.0) throw ValidationError(who + ": ci_high must be positive");
    if (!(e.level > 0.0 && e.level < 1.0)) {
        throw ValidationError(who + ": level must lie in (0,1)");
    }
    if (e.ci_low > e.rr || e.rr > e.ci_high) {
        throw ValidationError(who + ": rr lies outside [ci_low, ci_high]");
    }
}

EffectEstimate make_effect(std::string label, double rr, double ci_low, double ci_high,
                           double level) {
    EffectEstimate e{std::move(label), rr, ci_low, ci_high, level};
    validate(e);
    return e;
}

double normal_cdf(double x) {
    if (!std::isfinite(x)) throw ValidationError("normal_cdf: non-finite argument");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_sf(double x) {
    if (!std::isfinite(x)) throw ValidationError("normal_sf: non-finite argument");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("normal_quantile: q must lie in (0,1)");
    // 1 - q is exact for q >= 0.5, so the upper half reuses the lower branch.
    const bool upper = q > 0.5;
    const double lower_q = upper ? 1.0 - q : q;
    double x = ppnd16_lower(lower_q);
    // One Halley step against erfc polishes the last couple of ulps.
    const double err = 0.5 * std::erfc(-x / std::numbers::sqrt2) - lower_q;
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
    return upper ? -x : x;
}

double z_critical(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0,1)");
    return normal_quantile(1.0 - (1.0 - level) / 2.0);
}

double two_sided_p(double z) {
    if (!std::isfinite(z)) throw ValidationError("two_sided_p: non-finite z");
    const double p = std::erfc(std::abs(z) / std::numbers::sqrt2);
    return std::clamp(p, kMinPValue, 1.0);
}

double neg_log10(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("neg_log10: p must lie in [0,1]");
    }
    return 0.0 - std::log10(std::max(p, kMinPValue));
}

BackCalcResult p_from_estimate(const EffectEstimate& e) {
    validate(e);
    if (e.ci_low == e.ci_high) {
        throw DegenerateIntervalError(describe(e) + ": ci_low == ci_high");
    }
    BackCalcResult r;
    r.log_effect = std::log(e.rr);
    r.se = (std::log(e.ci_high) - std::log(e.ci_low)) / (2.0 * z_critical(e.level));
    if (!(r.se > 0.0)) throw DegenerateIntervalError(describe(e) + ": interval too narrow");
    r.z = r.log_effect / r.se;
    r.p = two_sided_p(r.z);
    return r;
}

double quantile_type6(std::span<const double> values, double q) {
    if (values.empty()) throw ValidationError("quantile_type6: empty input");
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile_type6: q must lie in (0,1)");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    const double h = (n + 1.0) * q;
    if (h <= 1.0) return sorted.front();
    if (h >= n) return sorted.back();
    const double lo = std::floor(h);
    const double frac = h - lo;
    const auto i = static_cast<std::size_t>(lo) - 1;
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double fwer(std::int64_t n, double alpha) {
    if (n < 1) throw ValidationError("fwer: n must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("fwer: alpha must lie in (0,1)");
    return -std::expm1(static_cast<double>(n) * std::log1p(-alpha));
}

BonferroniLine bonferroni_line(double alpha, std::int64_t m) {
    if (m < 1) throw ValidationError("bonferroni_line: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("bonferroni_line: alpha must lie in (0,1)");
    }
    const double threshold = alpha / static_cast<double>(m);
    return {threshold, -std::log10(threshold)};
}

}  // namespace metaaudit
