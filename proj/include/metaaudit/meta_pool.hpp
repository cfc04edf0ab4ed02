#pragma once

// Inverse-variance pooling of ratio estimates on the log scale, with
// Cochran's Q, DerSimonian-Laird tau^2 and I^2.

#include "metaaudit/stat_core.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace metaaudit {

enum class PoolMethod { Fixed, RandomDL };

std::string_view to_string(PoolMethod m);

/// Parses "fixed" or "dl"; throws ValidationError otherwise.
PoolMethod parse_pool_method(std::string_view s);

/// One study on the log scale.
struct LogStudy {
    double log_effect = 0.0;
    double se = 1.0;
};

struct PooledResult {
    std::size_t k = 0;
    double pooled_log = 0.0;
    double pooled_se = 0.0;
    double ci_low = 0.0;   // log scale
    double ci_high = 0.0;  // log scale
    double q_stat = 0.0;
    double tau2 = 0.0;
    double i2_percent = 0.0;
    /// False when k == 1: I^2 is reported as 0 but is undefined.
    bool i2_defined = true;
    PoolMethod method = PoolMethod::Fixed;
};

/// I^2 = max(0, (Q - (k-1)) / Q) * 100, and 0 when Q == 0.
double i2(double q_stat, std::size_t k);

/// Back-calculates each estimate's log effect and standard error.
std::vector<LogStudy> to_log_studies(std::span<const EffectEstimate> estimates);

PooledResult pool_fixed(std::span<const LogStudy> studies);
PooledResult pool_fixed(std::span<const EffectEstimate> estimates);

/// Requires k >= 2.
PooledResult pool_random_dl(std::span<const LogStudy> studies);
PooledResult pool_random_dl(std::span<const EffectEstimate> estimates);

/// Random-effects pooling with a caller-supplied between-study variance.
/// Q and I^2 are still the fixed-effect heterogeneity statistics.
PooledResult pool_with_tau2(std::span<const LogStudy> studies, double tau2);

PooledResult pool(std::span<const EffectEstimate> estimates, PoolMethod method);

}  // namespace metaaudit
