#include "metaaudit/cli.hpp"
#include "metaaudit/ingest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace metaaudit;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("metaaudit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

std::string fixture(const char* name) { return (default_fixture_dir() / name).string(); }

}  // namespace

TEST_F(CliTest, SpacesPrintsSummary) {
    const auto r = run({"spaces", "--in", fixture("table2.csv"), "--out", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* v : {"240", "2,496", "12,288", "58,368", "4,587,520", "34/34"}) {
        EXPECT_NE(r.out.find(v), std::string::npos) << v;
    }
    EXPECT_TRUE(fs::exists(dir_ / "spaces.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "summary.csv"));
}

TEST_F(CliTest, PFromCiEmptyInput) {
    const auto in = dir_ / "empty.csv";
    std::ofstream(in) << "label,rr,ci_low,ci_high\n";
    const auto r = run({"pfromci", "--in", in.string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no rows"), std::string::npos);
}

TEST_F(CliTest, PFromCiWritesTable) {
    const auto r = run({"pfromci", "--in", fixture("table1.csv"), "--out", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(dir_ / "backcalc.csv");
    EXPECT_NE(csv.find("ozone"), std::string::npos);
}

TEST_F(CliTest, MissingFileIsIoError) {
    const auto r = run({"pplot", "--in", (dir_ / "nope.csv").string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, BadValueIsValidationError) {
    const auto in = dir_ / "bad.csv";
    std::ofstream(in) << "citation,author,endpoint,p,direction_negative\n1,A,ozone,2,0\n";
    const auto r = run({"pplot", "--in", in.string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("row 2"), std::string::npos);
}

TEST_F(CliTest, SeedOnlyOnSimulate) {
    EXPECT_EQ(run({"pool", "--in", fixture("table1.csv"), "--seed", "3"}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
}

TEST_F(CliTest, PoolMethods) {
    for (const char* m : {"fixed", "dl"}) {
        const auto r = run({"pool", "--in", fixture("table1.csv"), "--method", m, "--out", dir_.string()});
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_TRUE(fs::exists(dir_ / "pooled.csv"));
    }
    EXPECT_EQ(run({"pool", "--in", fixture("table1.csv"), "--method", "reml"}).code, 2);
}

TEST_F(CliTest, SimulateIsReproducible) {
    const auto a = dir_ / "a", b = dir_ / "b";
    const std::vector<std::string> common{"simulate", "--regime", "mixture", "--pi", "0.4",
                                          "--s-tests", "50", "--m", "30", "--replicates", "100",
                                          "--seed", "12"};
    auto args = common;
    args.insert(args.end(), {"--out", a.string(), "--threads", "1"});
    ASSERT_EQ(run(args).code, 0);
    args = common;
    args.insert(args.end(), {"--out", b.string(), "--threads", "4"});
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(a / "pvalues.csv"), slurp(b / "pvalues.csv"));
    EXPECT_EQ(slurp(a / "shape.csv"), slurp(b / "shape.csv"));
    EXPECT_EQ(run({"simulate", "--regime", "null"}).code, 2);  // seed required
}

TEST_F(CliTest, SimulateConfigFile) {
    const auto cfg = dir_ / "sim.ini";
    std::ofstream(cfg) << "regime=phack\ns-tests=20\nm=10\nseed=5\n";
    const auto r = run({"simulate", "--config", cfg.string(), "--out", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(dir_ / "pvalues.csv").find("phack"), std::string::npos);
}

TEST_F(CliTest, ReportOnFixtures) {
    const auto r = run({"report", "--fixtures", "--out", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* ep : {"ozone", "CO", "NO2", "SO2", "PM10", "PM2.5"}) {
        EXPECT_TRUE(fs::exists(dir_ / ("pplot_" + std::string(ep) + ".svg"))) << ep;
    }
    for (const char* f : {"spaces.csv", "summary.csv", "descriptives.csv", "diagnostics.csv",
                          "backcalc.csv", "volcano.csv", "volcano.svg", "report.txt"}) {
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    }
    const auto first = slurp(dir_ / "pplot_ozone.svg");
    ASSERT_EQ(run({"report", "--fixtures", "--out", dir_.string()}).code, 0);
    EXPECT_EQ(slurp(dir_ / "pplot_ozone.svg"), first);
}
