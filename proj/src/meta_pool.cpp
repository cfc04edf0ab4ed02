#include "metaaudit/meta_pool.hpp"

#include "metaaudit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace metaaudit {

namespace {

void check_studies(std::span<const LogStudy> studies, std::size_t min_k, const char* who) {
    if (studies.size() < min_k) {
        throw ValidationError(std::string(who) + ": need at least " + std::to_string(min_k) +
                              " studies, got " + std::to_string(studies.size()));
    }
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const auto& s = studies[i];
        if (!std::isfinite(s.log_effect) || !std::isfinite(s.se) || !(s.se > 0.0)) {
            throw ValidationError(std::string(who) + ": study " + std::to_string(i + 1) +
                                  " has invalid log effect or standard error");
        }
    }
}

struct WeightedMean {
    double mean = 0.0;
    double sum_w = 0.0;
};

WeightedMean weighted_mean(std::span<const LogStudy> studies, double tau2) {
    double sum_w = 0.0;
    double sum_wy = 0.0;
    for (const auto& s : studies) {
        const double w = 1.0 / (s.se * s.se + tau2);
        sum_w += w;
        sum_wy += w * s.log_effect;
    }
    return {sum_wy / sum_w, sum_w};
}

// Cochran's Q about the fixed-effect mean.
double cochran_q(std::span<const LogStudy> studies, double fixed_mean) {
    double q = 0.0;
    for (const auto& s : studies) {
        const double d = s.log_effect - fixed_mean;
        q += d * d / (s.se * s.se);
    }
    return q;
}

PooledResult assemble(std::span<const LogStudy> studies, double tau2, PoolMethod method) {
    const auto fixed = weighted_mean(studies, 0.0);
    const auto pooled = tau2 > 0.0 ? weighted_mean(studies, tau2) : fixed;
    const double zc = z_critical(0.95);

    PooledResult r;
    r.k = studies.size();
    r.method = method;
    r.tau2 = tau2;
    r.pooled_log = pooled.mean;
    r.pooled_se = 1.0 / std::sqrt(pooled.sum_w);
    r.ci_low = r.pooled_log - zc * r.pooled_se;
    r.ci_high = r.pooled_log + zc * r.pooled_se;
    r.q_stat = r.k > 1 ? cochran_q(studies, fixed.mean) : 0.0;
    r.i2_percent = i2(r.q_stat, r.k);
    r.i2_defined = r.k > 1;
    return r;
}

}  // namespace

std::string_view to_string(PoolMethod m) {
    return m == PoolMethod::Fixed ? "fixed" : "random_DL";
}

PoolMethod parse_pool_method(std::string_view s) {
    if (s == "fixed") return PoolMethod::Fixed;
    if (s == "dl" || s == "random_DL" || s == "random") return PoolMethod::RandomDL;
    throw ValidationError("unknown pooling method '" + std::string(s) + "' (expected fixed or dl)");
}

double i2(double q_stat, std::size_t k) {
    if (!(q_stat >= 0.0) || !std::isfinite(q_stat)) throw ValidationError("i2: Q must be >= 0");
    if (k < 1) throw ValidationError("i2: k must be >= 1");
    if (q_stat == 0.0 || k == 1) return 0.0;
    const double df = static_cast<double>(k - 1);
    return std::max(0.0, (q_stat - df) / q_stat) * 100.0;
}

std::vector<LogStudy> to_log_studies(std::span<const EffectEstimate> estimates) {
    std::vector<LogStudy> out;
    out.reserve(estimates.size());
    for (const auto& e : estimates) {
        const auto b = p_from_estimate(e);
        out.push_back({b.log_effect, b.se});
    }
    return out;
}

PooledResult pool_fixed(std::span<const LogStudy> studies) {
    check_studies(studies, 1, "pool_fixed");
    return assemble(studies, 0.0, PoolMethod::Fixed);
}

PooledResult pool_fixed(std::span<const EffectEstimate> estimates) {
    const auto studies = to_log_studies(estimates);
    return pool_fixed(std::span<const LogStudy>(studies));
}

PooledResult pool_random_dl(std::span<const LogStudy> studies) {
    check_studies(studies, 2, "pool_random_dl");
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (const auto& s : studies) {
        const double w = 1.0 / (s.se * s.se);
        sum_w += w;
        sum_w2 += w * w;
    }
    const double q = cochran_q(studies, weighted_mean(studies, 0.0).mean);
    const double df = static_cast<double>(studies.size() - 1);
    const double c = sum_w - sum_w2 / sum_w;
    const double tau2 = c > 0.0 ? std::max(0.0, (q - df) / c) : 0.0;
    return assemble(studies, tau2, PoolMethod::RandomDL);
}

PooledResult pool_random_dl(std::span<const EffectEstimate> estimates) {
    const auto studies = to_log_studies(estimates);
    return pool_random_dl(std::span<const LogStudy>(studies));
}

PooledResult pool_with_tau2(std::span<const LogStudy> studies, double tau2) {
    check_studies(studies, 1, "pool_with_tau2");
    if (!(tau2 >= 0.0) || !std::isfinite(tau2)) {
        throw ValidationError("pool_with_tau2: tau2 must be finite and >= 0");
    }
    return assemble(studies, tau2, PoolMethod::RandomDL);
}

PooledResult pool(std::span<const EffectEstimate> estimates, PoolMethod method) {
    return method == PoolMethod::Fixed ? pool_fixed(estimates) : pool_random_dl(estimates);
}

}  // namespace metaaudit
