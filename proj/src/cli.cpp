#include "metaaudit/cli.hpp"

#include "metaaudit/diagnostics.hpp"
#include "metaaudit/errors.hpp"
#include "metaaudit/ingest.hpp"
#include "metaaudit/meta_pool.hpp"
#include "metaaudit/render.hpp"
#include "metaaudit/search_space.hpp"
#include "metaaudit/simulate.hpp"
#include "metaaudit/stat_core.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace metaaudit {

namespace {

// Endpoint order of the bundled p-value table.
const std::vector<std::string> kFixtureEndpoints = {"ozone", "CO", "NO2", "SO2", "PM10", "PM2.5"};

std::string file_token(const std::string& s) {
    std::string out = s;
    for (auto& c : out) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
        if (!keep) c = '_';
    }
    return out;
}

fs::path out_dir(const std::string& given, const std::string& command) {
    return given.empty() ? fs::path("out") / command : fs::path(given);
}

std::string with_commas(std::int64_t v) {
    std::string digits = std::to_string(v < 0 ? -v : v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return v < 0 ? "-" + out : out;
}

// Fills options of `cmd` not given on the command line from a key=value file.
void merge_config_file(CLI::App& cmd, const std::string& path) {
    if (!fs::exists(path)) throw IoError("cannot open '" + path + "' for reading");
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (item.name.empty() || item.name == "++" || item.name == "--") continue;
        auto* opt = cmd.get_option_no_throw("--" + item.name);
        if (opt == nullptr || item.name == "config") {
            throw ValidationError(path + ": unknown key '" + item.name + "'");
        }
        if (opt->count() == 0) {
            opt->add_result(item.inputs);
            opt->run_callback();
        }
    }
}

// ---------------------------------------------------------------- spaces

struct SpacesReport {
    std::string rows_csv;
    std::string summary_csv;
    std::string text;
    std::size_t mismatches = 0;
};

SpacesReport spaces_report(const std::vector<CountsRow>& rows) {
    if (rows.empty()) throw ValidationError("counts: no rows");
    SpacesReport rep;
    std::vector<SearchSpace> spaces;
    std::ostringstream csv;
    csv << "citation,author,outcomes,predictors,covariates,lags,space1,space2,space3,printed_match\n";
    for (const auto& row : rows) {
        const auto& c = row.counts;
        const auto s = compute_space(c);
        spaces.push_back(s);
        std::string match = "na";
        if (row.printed) {
            match = *row.printed == s ? "yes" : "no";
            if (match == "no") ++rep.mismatches;
        }
        csv << c.citation << ',' << c.author << ',' << c.outcomes << ',' << c.predictors << ','
            << c.covariates << ',' << c.lags << ',' << s.space1 << ',' << s.space2 << ','
            << s.space3 << ',' << match << '\n';
    }
    rep.rows_csv = csv.str();

    const auto sum = summarize_spaces(spaces);
    struct Line {
        const char* name;
        double FiveNumber::*field;
    };
    const Line lines[] = {{"maximum", &FiveNumber::max},
                          {"q3", &FiveNumber::q3},
                          {"median", &FiveNumber::median},
                          {"q1", &FiveNumber::q1},
                          {"minimum", &FiveNumber::min}};
    std::ostringstream scsv;
    std::ostringstream text;
    scsv << "statistic,space1,space2,space3,space1_exact,space2_exact,space3_exact\n";
    text << "Search spaces for " << sum.n << " studies (quartiles: (n+1)p interpolation, "
         << "shown rounded half up)\n";
    text << std::left << std::setw(10) << "statistic" << std::right << std::setw(12) << "Space1"
         << std::setw(12) << "Space2" << std::setw(14) << "Space3" << '\n';
    for (const auto& l : lines) {
        const double a = sum.space1.*l.field;
        const double b = sum.space2.*l.field;
        const double c = sum.space3.*l.field;
        scsv << l.name << ',' << round_half_up(a) << ',' << round_half_up(b) << ','
             << round_half_up(c) << ',' << format_double(a) << ',' << format_double(b) << ','
             << format_double(c) << '\n';
        text << std::left << std::setw(10) << l.name << std::right << std::setw(12)
             << with_commas(round_half_up(a)) << std::setw(12) << with_commas(round_half_up(b))
             << std::setw(14) << with_commas(round_half_up(c)) << '\n';
    }
    if (std::any_of(rows.begin(), rows.end(), [](const CountsRow& r) { return r.printed.has_value(); })) {
        text << "printed search spaces reproduced: " << (rows.size() - rep.mismatches) << '/'
             << rows.size() << '\n';
    }
    rep.summary_csv = scsv.str();
    rep.text = text.str();
    return rep;
}

// ----------------------------------------------------------------- pplot

struct PplotReport {
    std::vector<std::pair<std::string, std::string>> files;  // name, content
    std::string diagnostics_row;
    std::string text;
};

const char* kDiagnosticsHeader =
    "endpoint,m,alpha,frac_le_alpha,ks_d,ks_p,breakpoint_rank,sse_two_segment,sse_one_segment,"
    "bilinearity_ratio,note\n";

PplotReport pplot_report(const std::vector<PValueRecord>& records, const std::string& endpoint,
                         double alpha, const std::string& provenance) {
    const auto series = build_pplot(records, endpoint, alpha);
    PplotReport rep;

    std::ostringstream csv;
    csv << "rank,p,citation\n";
    for (const auto& pt : series.points) {
        csv << pt.rank << ',' << format_double(pt.p) << ',' << pt.citation << '\n';
    }
    const std::string token = file_token(endpoint);
    rep.files.emplace_back("series_" + token + ".csv", csv.str());

    SvgOptions opts;
    opts.provenance = provenance;
    rep.files.emplace_back("pplot_" + token + ".svg", render_pplot_svg(series, opts));

    std::ostringstream row;
    std::ostringstream text;
    text << std::left << std::setw(8) << endpoint << std::right << " m=" << std::setw(3)
         << series.m << "  p<=" << format_double(alpha) << ": " << format_fixed(series.frac_le_alpha, 3);
    row << endpoint << ',' << series.m << ',' << format_double(alpha) << ','
        << format_double(series.frac_le_alpha) << ',';
    if (series.m >= 6) {
        const auto ks = uniformity_ks(series);
        const auto fit = bilinearity_fit(series);
        row << format_double(ks.d_stat) << ',' << format_double(ks.p_ks) << ','
            << fit.breakpoint_rank << ',' << format_double(fit.sse_two_segment) << ','
            << format_double(fit.sse_one_segment) << ',' << format_double(fit.ratio) << ','
            << kDiagnosticLabel << '\n';
        text << "  KS D=" << format_fixed(ks.d_stat, 3) << " p=" << format_fixed(ks.p_ks, 4)
             << "  two-segment ratio=" << format_fixed(fit.ratio, 3) << " (break at rank "
             << fit.breakpoint_rank << ")";
    } else if (series.m >= 5) {
        const auto ks = uniformity_ks(series);
        row << format_double(ks.d_stat) << ',' << format_double(ks.p_ks) << ",,,,,"
            << kDiagnosticLabel << "; too few points for two-segment fit\n";
        text << "  KS D=" << format_fixed(ks.d_stat, 3) << " p=" << format_fixed(ks.p_ks, 4);
    } else {
        row << ",,,,,," << kDiagnosticLabel << "; too few points for KS and two-segment fit\n";
    }
    text << '\n';
    rep.diagnostics_row = row.str();
    rep.text = text.str();
    return rep;
}

// --------------------------------------------------------------- pfromci

std::string backcalc_csv(const std::vector<EffectEstimate>& effects, std::string& text) {
    std::ostringstream csv;
    std::ostringstream t;
    csv << "label,rr,ci_low,ci_high,level,log_effect,se,z,p\n";
    t << std::left << std::setw(10) << "label" << std::right << std::setw(8) << "rr"
      << std::setw(14) << "ln(rr)" << std::setw(14) << "se" << std::setw(10) << "z"
      << std::setw(14) << "p" << '\n';
    for (const auto& e : effects) {
        const auto b = p_from_estimate(e);
        csv << e.label << ',' << format_double(e.rr) << ',' << format_double(e.ci_low) << ','
            << format_double(e.ci_high) << ',' << format_double(e.level) << ','
            << format_double(b.log_effect) << ',' << format_double(b.se) << ','
            << format_double(b.z) << ',' << format_double(b.p) << '\n';
        std::ostringstream p;
        p << std::setprecision(4) << b.p;
        t << std::left << std::setw(10) << e.label << std::right << std::setw(8)
          << format_double(e.rr) << std::setw(14) << format_fixed(b.log_effect, 6) << std::setw(14)
          << format_fixed(b.se, 6) << std::setw(10) << format_fixed(b.z, 3) << std::setw(14)
          << p.str() << '\n';
    }
    text = t.str();
    return csv.str();
}

// --------------------------------------------------------------- volcano

std::pair<std::string, std::string> volcano_outputs(const std::vector<EffectEstimate>& effects,
                                                    double alpha, std::int64_t m_tests,
                                                    const std::string& provenance) {
    const auto plot = build_volcano(effects, alpha, m_tests);
    std::ostringstream csv;
    csv << "# bonferroni_y=" << format_double(plot.bonferroni_y) << " alpha=" << format_double(alpha)
        << " m_tests=" << m_tests << '\n';
    csv << "label,effect,neg_log10_p\n";
    for (const auto& pt : plot.points) {
        csv << pt.label << ',' << format_double(pt.effect) << ',' << format_double(pt.neg_log10_p)
            << '\n';
    }
    SvgOptions opts;
    opts.provenance = provenance;
    return {csv.str(), render_volcano_svg(plot, opts)};
}

// ------------------------------------------------------------------ pool

std::string pooled_csv(const PooledResult& r) {
    std::ostringstream csv;
    csv << "method,k,pooled_log,pooled_se,ci_low,ci_high,pooled_ratio,ratio_ci_low,ratio_ci_high,"
           "q_stat,tau2,i2_percent,i2_note\n";
    csv << to_string(r.method) << ',' << r.k << ',' << format_double(r.pooled_log) << ','
        << format_double(r.pooled_se) << ',' << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << ',' << format_double(std::exp(r.pooled_log)) << ','
        << format_double(std::exp(r.ci_low)) << ',' << format_double(std::exp(r.ci_high)) << ','
        << format_double(r.q_stat) << ',' << format_double(r.tau2) << ','
        << format_double(r.i2_percent) << ',' << (r.i2_defined ? "" : "undefined for k=1; reported as 0")
        << '\n';
    return csv.str();
}

std::string descriptives_csv(const std::vector<PValueRecord>& records, std::string& text) {
    const auto stats = descriptives(records);
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (std::find(order.begin(), order.end(), r.endpoint) == order.end()) order.push_back(r.endpoint);
    }
    std::ostringstream csv;
    std::ostringstream t;
    csv << "endpoint,count,min_p,max_p\n";
    t << "p-value descriptives (" << records.size() << " records)\n";
    for (const auto& e : order) {
        const auto& s = stats.at(e);
        csv << e << ',' << s.count << ',' << format_double(s.min_p) << ',' << format_double(s.max_p)
            << '\n';
        t << "  " << std::left << std::setw(8) << e << std::right << std::setw(4) << s.count
          << "  min/max " << format_double(s.min_p) << '/' << format_double(s.max_p) << '\n';
    }
    csv << "total," << records.size() << ",,\n";
    text = t.str();
    return csv.str();
}

void write_all(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    for (const auto& [name, content] : files) write_text_file(dir / name, content);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Meta-analysis reliability audit: search spaces, p-value plots, volcano plots, "
                 "pooling and p-value simulations",
                 "metaaudit"};
    app.require_subcommand(1);
    app.fallthrough(false);

    std::string in_path;
    std::string out_path;
    std::string endpoint;
    double alpha = 0.05;
    std::int64_t m_tests = 1;
    std::string method = "dl";

    auto* spaces = app.add_subcommand("spaces", "Search spaces per study and their summary");
    spaces->add_option("--in", in_path, "counts CSV")->required();
    spaces->add_option("--out", out_path, "output directory (default out/spaces)");

    auto* pplot = app.add_subcommand("pplot", "Rank-ordered p-value plot(s) with shape diagnostics");
    pplot->add_option("--in", in_path, "p-values CSV")->required();
    pplot->add_option("--endpoint", endpoint, "endpoint to plot (default: every endpoint)");
    pplot->add_option("--alpha", alpha, "reference significance level")->capture_default_str();
    pplot->add_option("--out", out_path, "output directory (default out/pplot)");

    auto* volcano = app.add_subcommand("volcano", "Volcano plot of back-calculated p-values");
    volcano->add_option("--in", in_path, "effects CSV")->required();
    volcano->add_option("--alpha", alpha, "family significance level")->capture_default_str();
    volcano->add_option("--m-tests", m_tests, "number of tests for the Bonferroni line")
        ->capture_default_str();
    volcano->add_option("--out", out_path, "output directory (default out/volcano)");

    auto* poolc = app.add_subcommand("pool", "Fixed or DerSimonian-Laird pooling");
    poolc->add_option("--in", in_path, "effects CSV")->required();
    poolc->add_option("--method", method, "fixed or dl")
        ->check(CLI::IsMember({"fixed", "dl"}))
        ->capture_default_str();
    poolc->add_option("--out", out_path, "output directory (default out/pool)");

    auto* pfromci = app.add_subcommand("pfromci", "Back-calculate z and p from ratio CIs");
    pfromci->add_option("--in", in_path, "effects CSV")->required();
    pfromci->add_option("--out", out_path, "output directory (default out/pfromci)");

    SimConfig cfg;
    std::string regime = "null";
    std::string mixture_kind = "phack";
    auto* simulate = app.add_subcommand("simulate", "Simulate p-value populations");
    std::string config_path;
    simulate->add_option("--config", config_path, "key=value file; command-line flags take precedence");
    simulate->add_option("--regime", regime, "null, effect, phack or mixture")->capture_default_str();
    simulate->add_option("--m", cfg.m, "p-values per replicate")->capture_default_str();
    simulate->add_option("--delta", cfg.delta, "mean of z under effect")->capture_default_str();
    simulate->add_option("--s-tests", cfg.s_tests, "tests searched per hacked study")
        ->capture_default_str();
    simulate->add_option("--pi", cfg.pi_mix, "mixture fraction of altered studies")
        ->capture_default_str();
    simulate->add_option("--mixture-kind", mixture_kind, "phack or effect")->capture_default_str();
    auto* seed_opt = simulate->add_option("--seed", cfg.seed, "random seed (required)");
    simulate->add_option("--replicates", cfg.replicates, "number of replicates")
        ->capture_default_str();
    simulate->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    simulate->add_option("--out", out_path, "output directory (default out/simulate)");

    std::string fixtures;
    auto* report = app.add_subcommand("report", "Reproduce the full audit from bundled fixtures");
    auto* fixtures_opt = report->add_option("--fixtures", fixtures, "fixture directory")
                             ->expected(0, 1);
    report->add_option("--out", out_path, "output directory (default out/report)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (spaces->parsed()) {
            const auto rows = load_counts_table(in_path);
            const auto rep = spaces_report(rows);
            const auto dir = out_dir(out_path, "spaces");
            write_all(dir, {{"spaces.csv", rep.rows_csv}, {"summary.csv", rep.summary_csv}});
            out << rep.text << rep.summary_csv;
            if (rep.mismatches > 0) {
                err << "warning: " << rep.mismatches << " row(s) disagree with printed search spaces\n";
            }
        } else if (pplot->parsed()) {
            const auto records = load_pvalues(in_path);
            if (records.empty()) throw ValidationError(in_path + ": no rows");
            std::vector<std::string> endpoints;
            if (!endpoint.empty()) {
                endpoints.push_back(endpoint);
            } else {
                for (const auto& r : records) {
                    if (std::find(endpoints.begin(), endpoints.end(), r.endpoint) == endpoints.end()) {
                        endpoints.push_back(r.endpoint);
                    }
                }
            }
            const auto dir = out_dir(out_path, "pplot");
            std::string diag = kDiagnosticsHeader;
            out << "p-value plots (shape statistics are " << kDiagnosticLabel << ")\n";
            for (const auto& e : endpoints) {
                const auto rep = pplot_report(records, e, alpha, "source: " + in_path + ", endpoint " + e);
                write_all(dir, rep.files);
                diag += rep.diagnostics_row;
                out << rep.text;
            }
            write_text_file(dir / "diagnostics.csv", diag);
        } else if (volcano->parsed()) {
            const auto effects = load_effects(in_path);
            if (effects.empty()) throw ValidationError(in_path + ": no rows");
            const auto [csv, svg] = volcano_outputs(effects, alpha, m_tests, "source: " + in_path);
            const auto dir = out_dir(out_path, "volcano");
            write_all(dir, {{"volcano.csv", csv}, {"volcano.svg", svg}});
            out << csv;
        } else if (poolc->parsed()) {
            const auto effects = load_effects(in_path);
            if (effects.empty()) throw ValidationError(in_path + ": no rows");
            const auto r = pool(effects, parse_pool_method(method));
            const auto csv = pooled_csv(r);
            write_text_file(out_dir(out_path, "pool") / "pooled.csv", csv);
            out << "pooled ratio " << format_fixed(std::exp(r.pooled_log), 4) << " ("
                << format_fixed(std::exp(r.ci_low), 4) << ", " << format_fixed(std::exp(r.ci_high), 4)
                << ")  Q=" << format_fixed(r.q_stat, 3) << " tau2=" << format_double(r.tau2)
                << " I2=" << format_fixed(r.i2_percent, 1) << "%"
                << (r.i2_defined ? "" : " (undefined for k=1)") << '\n'
                << csv;
        } else if (pfromci->parsed()) {
            const auto effects = load_effects(in_path);
            if (effects.empty()) throw ValidationError(in_path + ": no rows");
            std::string text;
            const auto csv = backcalc_csv(effects, text);
            write_text_file(out_dir(out_path, "pfromci") / "backcalc.csv", csv);
            out << text;
        } else if (simulate->parsed()) {
            if (!config_path.empty()) merge_config_file(*simulate, config_path);
            if (seed_opt->count() == 0) throw ValidationError("--seed is required");
            cfg.regime = parse_regime(regime);
            cfg.mixture_kind = parse_mixture_kind(mixture_kind);
            validate(cfg);
            const auto reps = simulate_pvalues(cfg);
            std::ostringstream csv;
            csv << "# regime=" << regime << " m=" << cfg.m << " delta=" << format_double(cfg.delta)
                << " s_tests=" << cfg.s_tests << " pi=" << format_double(cfg.pi_mix)
                << " mixture_kind=" << mixture_kind << " seed=" << cfg.seed
                << " replicates=" << cfg.replicates << '\n';
            csv << "replicate,study,p\n";
            for (std::size_t r = 0; r < reps.size(); ++r) {
                for (const auto& rec : reps[r]) {
                    csv << r << ',' << rec.citation << ',' << format_double(rec.p) << '\n';
                }
            }
            const auto dir = out_dir(out_path, "simulate");
            write_text_file(dir / "pvalues.csv", csv.str());
            out << "simulated " << cfg.replicates << " replicate(s) of " << cfg.m << " p-values ("
                << regime << ")\n";
            if (cfg.replicates >= 100 && cfg.m >= 6) {
                const auto s = shape_check(cfg);
                std::ostringstream shape;
                shape << "replicates,mean_frac_le_005,mean_ks_d,ks_reject_rate,"
                         "mean_bilinearity_ratio,note\n"
                      << s.replicates << ',' << format_double(s.mean_frac_le_005) << ','
                      << format_double(s.mean_ks_d) << ',' << format_double(s.ks_reject_rate) << ','
                      << format_double(s.mean_bilinearity_ratio) << ',' << kDiagnosticLabel << '\n';
                write_text_file(dir / "shape.csv", shape.str());
                out << shape.str();
            } else {
                out << "shape statistics need replicates >= 100 and m >= 6; skipped\n";
            }
        } else if (report->parsed()) {
            if (fixtures_opt->count() == 0) {
                throw ValidationError("report: --fixtures is required");
            }
            const fs::path fx = fixtures.empty() ? default_fixture_dir() : fs::path(fixtures);
            const auto dir = out_dir(out_path, "report");
            std::ostringstream text;

            const auto counts = load_counts_table(fx / "table2.csv");
            const auto sp = spaces_report(counts);
            write_all(dir, {{"spaces.csv", sp.rows_csv}, {"summary.csv", sp.summary_csv}});
            text << sp.text << '\n';

            const auto records = load_pvalues(fx / "table4.csv");
            std::string dtext;
            write_text_file(dir / "descriptives.csv", descriptives_csv(records, dtext));
            text << dtext << '\n';

            std::string diag = kDiagnosticsHeader;
            text << "p-value plots (shape statistics are " << kDiagnosticLabel << ")\n";
            for (const auto& e : kFixtureEndpoints) {
                const auto rep = pplot_report(records, e, 0.05,
                                              "source: bundled table4.csv (Table 4), endpoint " + e);
                write_all(dir, rep.files);
                diag += rep.diagnostics_row;
                text << rep.text;
            }
            write_text_file(dir / "diagnostics.csv", diag);
            text << '\n';

            const auto effects = load_effects(fx / "table1.csv");
            std::string btext;
            write_text_file(dir / "backcalc.csv", backcalc_csv(effects, btext));
            text << "Back-calculated p-values\n" << btext << '\n';
            const auto [vcsv, vsvg] = volcano_outputs(
                effects, 0.05, static_cast<std::int64_t>(effects.size()),
                "source: bundled table1.csv (Table 1)");
            write_all(dir, {{"volcano.csv", vcsv}, {"volcano.svg", vsvg}});

            text << "Family-wise error, 1-(1-alpha)^n: n=500 alpha=0.05 -> "
                 << format_fixed(fwer(500, 0.05), 6) << "; n=500 alpha=0.005 -> "
                 << format_fixed(fwer(500, 0.005), 4) << '\n';
            text << "Bonferroni line -log10(0.05/66) = "
                 << format_fixed(bonferroni_line(0.05, 66).neg_log10, 4) << '\n';
            write_text_file(dir / "report.txt", text.str());
            out << text.str();
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace metaaudit
