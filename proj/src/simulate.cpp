#include "metaaudit/simulate.hpp"

#include "metaaudit/errors.hpp"
#include "metaaudit/stat_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>

namespace metaaudit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class ReplicateStream {
public:
    ReplicateStream(std::uint64_t seed, std::int64_t replicate) {
        const std::uint64_t a = splitmix64(seed);
        const std::uint64_t b = splitmix64(a ^ splitmix64(static_cast<std::uint64_t>(replicate)));
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        engine_.seed(seq);
    }

    // Uniform on the open interval (0,1) with 53 random bits.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }

    double normal() { return normal_quantile(uniform()); }

private:
    std::mt19937_64 engine_;
};

double null_p(ReplicateStream& rng) { return two_sided_p(rng.normal()); }

double effect_p(ReplicateStream& rng, double delta) { return two_sided_p(delta + rng.normal()); }

// min over s null p-values == p of the largest |z|.
double hacked_p(ReplicateStream& rng, std::int64_t s_tests) {
    double best = 0.0;
    for (std::int64_t i = 0; i < s_tests; ++i) best = std::max(best, std::abs(rng.normal()));
    return two_sided_p(best);
}

unsigned worker_count(const SimConfig& cfg) {
    unsigned n = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    n = std::max(1u, n);
    return static_cast<unsigned>(std::min<std::int64_t>(n, cfg.replicates));
}

// Runs body(r) for every replicate index; the first exception is rethrown.
void for_each_replicate(const SimConfig& cfg, const std::function<void(std::int64_t)>& body) {
    const unsigned workers = worker_count(cfg);
    if (workers <= 1) {
        for (std::int64_t r = 0; r < cfg.replicates; ++r) body(r);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::int64_t r = next++; r < cfg.replicates; r = next++) {
                    try {
                        body(r);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                        next = cfg.replicates;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Null: return "null";
        case Regime::Effect: return "effect";
        case Regime::PHack: return "phack";
        case Regime::Mixture: return "mixture";
    }
    return "unknown";
}

std::string_view to_string(MixtureKind k) {
    return k == MixtureKind::PHack ? "phack" : "effect";
}

Regime parse_regime(std::string_view s) {
    if (s == "null") return Regime::Null;
    if (s == "effect") return Regime::Effect;
    if (s == "phack") return Regime::PHack;
    if (s == "mixture") return Regime::Mixture;
    throw ValidationError("unknown regime '" + std::string(s) +
                          "' (expected null, effect, phack or mixture)");
}

MixtureKind parse_mixture_kind(std::string_view s) {
    if (s == "phack") return MixtureKind::PHack;
    if (s == "effect") return MixtureKind::Effect;
    throw ValidationError("unknown mixture kind '" + std::string(s) + "' (expected phack or effect)");
}

void validate(const SimConfig& cfg) {
    if (cfg.m < 1) throw ValidationError("simulate: m must be >= 1");
    if (cfg.replicates < 1) throw ValidationError("simulate: replicates must be >= 1");
    if (!std::isfinite(cfg.delta)) throw ValidationError("simulate: delta must be finite");
    const bool hacks = cfg.regime == Regime::PHack ||
                       (cfg.regime == Regime::Mixture && cfg.mixture_kind == MixtureKind::PHack);
    if (hacks && cfg.s_tests < 1) throw ValidationError("simulate: s_tests must be >= 1");
    if (cfg.regime == Regime::Mixture && !(cfg.pi_mix >= 0.0 && cfg.pi_mix <= 1.0)) {
        throw ValidationError("simulate: pi must lie in [0,1]");
    }
}

std::vector<double> simulate_replicate(const SimConfig& cfg, std::int64_t replicate) {
    validate(cfg);
    ReplicateStream rng(cfg.seed, replicate);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(cfg.m));
    for (std::int64_t i = 0; i < cfg.m; ++i) {
        switch (cfg.regime) {
            case Regime::Null: out.push_back(null_p(rng)); break;
            case Regime::Effect: out.push_back(effect_p(rng, cfg.delta)); break;
            case Regime::PHack: out.push_back(hacked_p(rng, cfg.s_tests)); break;
            case Regime::Mixture: {
                const bool altered = rng.uniform() < cfg.pi_mix;
                if (!altered) {
                    out.push_back(null_p(rng));
                } else if (cfg.mixture_kind == MixtureKind::PHack) {
                    out.push_back(hacked_p(rng, cfg.s_tests));
                } else {
                    out.push_back(effect_p(rng, cfg.delta));
                }
                break;
            }
        }
    }
    return out;
}

std::vector<std::vector<PValueRecord>> simulate_pvalues(const SimConfig& cfg) {
    validate(cfg);
    std::vector<std::vector<PValueRecord>> out(static_cast<std::size_t>(cfg.replicates));
    const std::string endpoint(to_string(cfg.regime));
    for_each_replicate(cfg, [&](std::int64_t r) {
        const auto p = simulate_replicate(cfg, r);
        auto& rows = out[static_cast<std::size_t>(r)];
        rows.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            rows.push_back({static_cast<std::int64_t>(i + 1), "sim", endpoint, p[i], false, false});
        }
    });
    return out;
}

ShapeStats shape_check(const SimConfig& cfg) {
    validate(cfg);
    if (cfg.replicates < 100) throw ValidationError("shape_check: replicates must be >= 100");
    if (cfg.m < 6) throw InsufficientDataError("shape_check: m must be >= 6");

    struct PerReplicate {
        double frac = 0.0;
        double ks_d = 0.0;
        double ratio = 0.0;
        bool ks_reject = false;
    };
    std::vector<PerReplicate> per(static_cast<std::size_t>(cfg.replicates));
    for_each_replicate(cfg, [&](std::int64_t r) {
        const auto p = simulate_replicate(cfg, r);
        const auto series = build_pplot(std::span<const double>(p), "sim", 0.05);
        const auto ks = uniformity_ks(series);
        per[static_cast<std::size_t>(r)] = {series.frac_le_alpha, ks.d_stat,
                                            bilinearity_fit(series).ratio, ks.p_ks <= 0.05};
    });

    // Summed in replicate order so the result does not depend on scheduling.
    ShapeStats s;
    s.replicates = cfg.replicates;
    std::int64_t rejects = 0;
    for (const auto& x : per) {
        s.mean_frac_le_005 += x.frac;
        s.mean_ks_d += x.ks_d;
        s.mean_bilinearity_ratio += x.ratio;
        rejects += x.ks_reject ? 1 : 0;
    }
    const auto n = static_cast<double>(cfg.replicates);
    s.mean_frac_le_005 /= n;
    s.mean_ks_d /= n;
    s.mean_bilinearity_ratio /= n;
    s.ks_reject_rate = static_cast<double>(rejects) / n;
    return s;
}

}  // namespace metaaudit
