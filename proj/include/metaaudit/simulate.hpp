#pragma once

// Monte-Carlo populations of reported p-values.
//
//   null    z ~ N(0,1), p = 2(1 - Phi(|z|))
//   effect  z ~ N(delta,1), same p
//   phack   p = min of s_tests independent null p-values
//   mixture each study is phack (or effect) with probability pi_mix, else null
//
// Replicate r draws from its own generator seeded from (seed, r), so serial
// and threaded runs produce identical output.

#include "metaaudit/diagnostics.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace metaaudit {

enum class Regime { Null, Effect, PHack, Mixture };

/// What the non-null fraction of a mixture does.
enum class MixtureKind { PHack, Effect };

std::string_view to_string(Regime r);
std::string_view to_string(MixtureKind k);
Regime parse_regime(std::string_view s);
MixtureKind parse_mixture_kind(std::string_view s);

struct SimConfig {
    Regime regime = Regime::Null;
    std::int64_t m = 30;
    double delta = 0.0;
    std::int64_t s_tests = 1;
    double pi_mix = 0.0;
    std::uint64_t seed = 0;
    std::int64_t replicates = 1;
    MixtureKind mixture_kind = MixtureKind::PHack;
    /// Worker threads; 0 picks hardware concurrency. Never changes results.
    unsigned threads = 0;
};

void validate(const SimConfig& cfg);

/// p-values for one replicate, in study order.
std::vector<double> simulate_replicate(const SimConfig& cfg, std::int64_t replicate);

/// All replicates, replicate-major. Each record's citation is the study
/// index (1-based) and its endpoint is the regime name.
std::vector<std::vector<PValueRecord>> simulate_pvalues(const SimConfig& cfg);

struct ShapeStats {
    std::int64_t replicates = 0;
    double mean_frac_le_005 = 0.0;
    double mean_ks_d = 0.0;
    double mean_bilinearity_ratio = 0.0;
    /// Fraction of replicates whose KS p-value is <= 0.05.
    double ks_reject_rate = 0.0;
};

/// Averages the diagnostics statistics over replicates. Requires
/// replicates >= 100 and m >= 6.
ShapeStats shape_check(const SimConfig& cfg);

}  // namespace metaaudit
