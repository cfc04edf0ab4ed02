#include "metaaudit/errors.hpp"
#include "metaaudit/ingest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace metaaudit;

namespace {

std::filesystem::path fixture(const char* name) { return default_fixture_dir() / name; }

template <class F>
std::string error_of(F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Fixtures, CountsReproducePrintedSpaces) {
    const auto rows = load_counts_table(fixture("table2.csv"));
    ASSERT_EQ(rows.size(), 34u);
    int matches = 0;
    for (const auto& r : rows) {
        ASSERT_TRUE(r.printed.has_value());
        matches += compute_space(r.counts) == *r.printed ? 1 : 0;
    }
    EXPECT_EQ(matches, 34);
}

TEST(Fixtures, PValuesMatchTranscription) {
    const auto p = load_pvalues(fixture("table4.csv"));
    EXPECT_EQ(p.size(), 104u);
    const auto d = descriptives(p);
    EXPECT_EQ(d.at("ozone").count, 19u);
    EXPECT_EQ(d.at("CO").count, 20u);
    EXPECT_EQ(d.at("NO2").count, 21u);
    EXPECT_EQ(d.at("SO2").count, 14u);
    EXPECT_EQ(d.at("PM10").count, 17u);
    EXPECT_EQ(d.at("PM2.5").count, 13u);
    EXPECT_EQ(d.at("ozone").max_p, 0.78);
    EXPECT_EQ(d.at("SO2").max_p, 0.99);
    for (const auto& r : p) EXPECT_NE(r.citation, 29);
}

TEST(Fixtures, Effects) {
    const auto e = load_effects(fixture("table1.csv"));
    ASSERT_EQ(e.size(), 6u);
    for (const auto& x : e) {
        EXPECT_EQ(x.level, 0.95);
        if (x.label == "ozone") {
            EXPECT_LE(x.ci_low, 1.0);
            EXPECT_GE(x.ci_high, 1.0);
        } else {
            EXPECT_GT(x.ci_low, 1.0);
        }
    }
}

TEST(ParsePValues, HeaderOnlyIsEmpty) {
    std::istringstream in("citation,author,endpoint,p,direction_negative\n");
    EXPECT_TRUE(parse_pvalues(in, "mem").empty());
}

TEST(ParsePValues, TruncatedAndBlank) {
    std::istringstream in(
        "\xEF\xBB\xBF# comment\n"
        "citation,author,endpoint,p,direction_negative\n"
        "1,A,ozone,<0.001,1\n"
        "\n"
        "2,B,ozone,,0\n"
        "3,C,ozone, 0.2 ,false\n");
    const auto r = parse_pvalues(in, "mem");
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].p, 0.001);
    EXPECT_TRUE(r[0].truncated);
    EXPECT_TRUE(r[0].direction_negative);
    EXPECT_EQ(r[1].p, 0.2);
    EXPECT_FALSE(r[1].truncated);
}

TEST(ParsePValues, ErrorsNameRowAndField) {
    std::istringstream in("citation,author,endpoint,p,direction_negative\n1,A,ozone,1.5,0\n");
    const auto msg = error_of([&] { parse_pvalues(in, "bad.csv"); });
    EXPECT_NE(msg.find("bad.csv"), std::string::npos);
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("'p'"), std::string::npos);
    std::istringstream dup(
        "citation,author,endpoint,p,direction_negative\n1,A,ozone,0.5,0\n1,A,ozone,0.4,0\n");
    EXPECT_THROW(parse_pvalues(dup, "dup"), ValidationError);
    std::istringstream zero("citation,author,endpoint,p,direction_negative\n1,A,ozone,0,0\n");
    EXPECT_THROW(parse_pvalues(zero, "zero"), ValidationError);
    std::istringstream header("citation,author,p\n");
    EXPECT_THROW(parse_pvalues(header, "hdr"), ValidationError);
}

TEST(ParseCounts, OverflowAndDuplicates) {
    std::istringstream big(
        "citation,author,outcomes,predictors,covariates,lags\n1,A,1,1,70,1\n");
    EXPECT_THROW(parse_counts(big, "big"), OverflowError);
    std::istringstream dup(
        "citation,author,outcomes,predictors,covariates,lags\n1,A,1,1,1,1\n1,B,1,1,1,1\n");
    EXPECT_THROW(parse_counts(dup, "dup"), ValidationError);
    std::istringstream text(
        "citation,author,outcomes,predictors,covariates,lags\n1,A,x,1,1,1\n");
    EXPECT_NE(error_of([&] { parse_counts(text, "t"); }).find("'outcomes'"), std::string::npos);
}

TEST(ParseEffects, IntervalOrder) {
    std::istringstream bad("label,rr,ci_low,ci_high\nx,1.0,1.1,1.2\n");
    EXPECT_THROW(parse_effects(bad, "e"), ValidationError);
    std::istringstream ok("label,rr,ci_low,ci_high,level\nx,1.0,0.9,1.2,0.9\ny,1.0,0.9,1.2,\n");
    const auto e = parse_effects(ok, "e");
    EXPECT_EQ(e[0].level, 0.9);
    EXPECT_EQ(e[1].level, 0.95);
}

TEST(Missing, FileIsIoError) {
    EXPECT_THROW(load_pvalues("/nonexistent/x.csv"), IoError);
}

TEST(RoundTrip, SerializeThenReload) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        std::vector<PValueRecord> p;
        std::vector<EffectEstimate> e;
        std::vector<StudyCounts> c;
        for (int i = 0; i < 1 + t; ++i) {
            p.push_back({i, "au" + std::to_string(i), i % 2 ? "NO2" : "PM2.5",
                         std::max(1e-12, u(rng)), u(rng) < 0.5, u(rng) < 0.2});
            const double rr = 0.5 + u(rng);
            e.push_back({"e" + std::to_string(i), rr, rr * (1 - u(rng) / 2), rr * (1 + u(rng)),
                         0.5 + u(rng) * 0.49});
            c.push_back({i, "a", 1 + i % 4, 1 + i % 3, i % 15, 1 + i % 7});
        }
        std::istringstream pi(write_pvalues_csv(p, "src\nline two"));
        std::istringstream ei(write_effects_csv(e));
        std::istringstream ci(write_counts_csv(c, "counts"));
        EXPECT_EQ(parse_pvalues(pi, "p"), p);
        EXPECT_EQ(parse_effects(ei, "e"), e);
        const auto rows = parse_counts(ci, "c");
        ASSERT_EQ(rows.size(), c.size());
        for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(rows[i].counts, c[i]);
    }
}

TEST(LoadDataset, Provenance) {
    const auto d = load_dataset(fixture("table2.csv"), fixture("table4.csv"), std::nullopt);
    EXPECT_EQ(d.counts.size(), 34u);
    EXPECT_EQ(d.pvalues.size(), 104u);
    EXPECT_TRUE(d.effects.empty());
    EXPECT_NE(d.provenance.find("table4.csv"), std::string::npos);
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-300), "1e-300");
    EXPECT_EQ(format_fixed(3.12057, 2), "3.12");
}
