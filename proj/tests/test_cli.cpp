#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "rpspt/io.hpp"

using namespace rpspt;
namespace fs = std::filesystem;

namespace {

const fs::path& dir() {
    static fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "rpspt_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string at(const std::string& name) { return (dir() / name).string(); }

std::string read_text(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

// Exit status of the CLI; stderr lands in err.txt.
int run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " + RPSPT_CLI_PATH + " " + args + " > " + at("out.txt") + " 2> " + at("err.txt");
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.rfind("WARN", 0) == 0) continue;
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        rows.push_back(r);
    }
    return rows;
}

struct Files {
    Files() {
        write_path_csv(at("bm.csv"), fixtures::brownian(2, 4096, 1.0, 7));
        write_path_csv(at("flat.csv"), SampledPath::constant(TimeGrid::uniform(1.0, 256), Vec::Constant(2, 1.5)));
        write_path_csv(at("prices.csv"), fixtures::gbm_prices(3, 1024, 1.0, 3));
        write_path_csv(at("still.csv"), SampledPath::constant(TimeGrid::uniform(1.0, 128), Vec::Constant(3, 2.0)));
        // Third asset collapses to a weight far below the boundary floor.
        write_path_csv(at("collapse.csv"), fixtures::tabulate(TimeGrid::uniform(1.0, 64), 3, [](double t) {
                           return std::vector<double>{1.0, 1.0, std::exp(-40.0 * t)};
                       }));
        write_text(at("bad.csv"), "t,x1\n0,1\n0.5,abc\n1,2\n");
        write_text(at("market.json"), R"({"kind": "market"})");
        write_text(at("entropy.json"), R"({"kind": "generated", "G": {"type": "entropy", "c": 1}})");
        write_text(at("unknown.json"), R"({"kind": "momentum"})");
        FunctionFamily one(FunctionFamily::Kind::Controlled, 3, {Vec::Constant(30, 0.1)}, 20);
        write_json(at("one.json"), to_json(one));
        FunctionFamily fam = ErgodicConfig::default_family();
        write_json(at("family.json"), to_json(fam));
        Json empty = to_json(fam);
        empty["coefficients"] = Json::array();
        write_json(at("empty.json"), empty);
        write_text(at("fig_config.json"), R"({"paths": 8, "horizon": 0.2, "seed": 11})");
        write_text(at("fig_bad.json"), R"({"spec": {"p": 0.1}, "paths": 8, "horizon": 0.2})");
    }
};

const Files& files() {
    static Files f;
    return f;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { files(); }
};

}  // namespace

TEST_F(Cli, LiftReportAndSummary) {
    ASSERT_EQ(run("lift --input " + at("bm.csv") + " --levels 4 --out " + at("lift.csv")), 0);
    auto rows = read_numeric_csv(at("lift.csv"));
    // One gap per successive pair of the four levels.
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows.back()[0], 12);
    auto summary = read_numeric_csv(at("lift_summary.csv"));
    ASSERT_EQ(summary.size(), 4u);
    for (const auto& r : summary) {
        EXPECT_LE(r[2], 1e-12);
        EXPECT_NEAR(r[3], 1.0, 0.2);
    }
    Json m = load_json(at("lift.manifest.json"));
    EXPECT_EQ(m["command"], "lift");
    EXPECT_EQ(m["outputs"].size(), 2u);
}

TEST_F(Cli, ConstantPathHasZeroGaps) {
    ASSERT_EQ(run("lift --input " + at("flat.csv") + " --levels 3 --out " + at("flat_report.csv")), 0);
    for (const auto& r : read_numeric_csv(at("flat_report.csv"))) EXPECT_EQ(r[2], 0.0);
    EXPECT_EQ(read_text(at("flat_report.csv")).find("WARN"), std::string::npos);
}

TEST_F(Cli, MalformedCsvExitsTwoWithLine) {
    EXPECT_EQ(run("lift --input " + at("bad.csv") + " --levels 2 --out " + at("x.csv")), 2);
    EXPECT_NE(read_text(at("err.txt")).find("line 3"), std::string::npos);
    EXPECT_EQ(run("lift --input " + at("missing.csv") + " --out " + at("x.csv")), 2);
    EXPECT_EQ(run("lift --input " + at("bm.csv") + " --levels 20 --out " + at("x.csv")), 2);
    EXPECT_EQ(run("nonsense"), 2);
}

TEST_F(Cli, MarketPortfolioHasUnitRelativeWealth) {
    ASSERT_EQ(run("wealth --market " + at("prices.csv") + " --portfolio " + at("market.json") + " --out " +
                  at("mkt.csv")),
              0);
    auto rows = read_numeric_csv(at("mkt.csv"));
    ASSERT_EQ(rows.size(), 1025u);
    for (const auto& r : rows) EXPECT_NEAR(r[2], 1.0, 1e-5);
    EXPECT_FALSE(fs::exists(at("mkt_master.csv")));
}

TEST_F(Cli, ConstantPricesGiveUnitWealth) {
    ASSERT_EQ(run("wealth --market " + at("still.csv") + " --portfolio " + at("entropy.json") + " --out " +
                  at("still_w.csv")),
              0);
    for (const auto& r : read_numeric_csv(at("still_w.csv"))) EXPECT_EQ(r[1], 1.0);
}

TEST_F(Cli, GeneratedSpecWritesMasterSides) {
    ASSERT_EQ(run("wealth --market " + at("prices.csv") + " --portfolio " + at("entropy.json") + " --T 0.5 --out " +
                  at("ent.csv")),
              0);
    auto w = read_numeric_csv(at("ent.csv"));
    EXPECT_EQ(w.size(), 513u);
    auto sides = read_numeric_csv(at("ent_master.csv"));
    ASSERT_EQ(sides.size(), 513u);
    // Weights-route lhs against the price-route wealth: equal up to discretization.
    for (std::size_t k = 0; k < sides.size(); ++k) EXPECT_NEAR(sides[k][1], w[k][3], 1e-4);
    auto rep = read_numeric_csv(at("ent_master_report.csv"));
    ASSERT_EQ(rep.size(), 2u);
    EXPECT_LT(rep[1][2], rep[0][2]);
}

TEST_F(Cli, WealthInputAndNumericalErrors) {
    EXPECT_EQ(run("wealth --market " + at("prices.csv") + " --portfolio " + at("unknown.json") + " --out " +
                  at("x.csv")),
              2);
    EXPECT_EQ(run("wealth --market " + at("prices.csv") + " --portfolio " + at("market.json") + " --T 0.3 --out " +
                  at("x.csv")),
              2);
    EXPECT_EQ(run("wealth --market " + at("collapse.csv") + " --portfolio " + at("market.json") + " --out " +
                  at("x.csv")),
              3);
}

TEST_F(Cli, SingleMemberFamilyHasZeroGap) {
    ASSERT_EQ(run("universal --market " + at("prices.csv") + " --family " + at("one.json") +
                  " --T-grid 0.25,0.5,1 --out " + at("one_cover.csv")),
              0);
    auto rows = read_numeric_csv(at("one_cover.csv"));
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_EQ(r[4], 0.0);
        EXPECT_EQ(r[5], 0.0);
    }
}

TEST_F(Cli, FamilyWithZeroMemberBeatsMarket) {
    // The default family contains F = 0, the market portfolio, whose relative wealth is 1.
    ASSERT_EQ(run("universal --market " + at("prices.csv") + " --family " + at("family.json") +
                  " --T-grid 0.25,0.5,0.75,1 --out " + at("cover.csv")),
              0);
    auto rows = read_numeric_csv(at("cover.csv"));
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_GE(r[1], -1e-12);
        EXPECT_GE(r[4], 0.0);
    }
    EXPECT_EQ(run("universal --market " + at("prices.csv") + " --family " + at("empty.json") + " --out " +
                  at("x.csv")),
              2);
    EXPECT_EQ(run("universal --market " + at("prices.csv") + " --family " + at("family.json") +
                  " --measure dirac --out " + at("x.csv")),
              2);
}

TEST_F(Cli, Figure1CurvesAndSidecar) {
    ASSERT_EQ(run("figure1 --config " + at("fig_config.json") + " --out " + at("fig.csv")), 0);
    std::ifstream in(at("fig.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,curve,mean,stderr");
    std::set<std::string> starts;
    while (std::getline(in, line))
        if (line.rfind("0,", 0) == 0) starts.insert(line);
    EXPECT_TRUE(starts.count("0,log-optimal,0,0"));
    EXPECT_TRUE(starts.count("0,alpha-optimal,0,0"));
    Json meta = load_json(sibling_path(at("fig.csv"), ".json"));
    EXPECT_EQ(meta["config"]["seed"], 11);
    EXPECT_TRUE(meta["scalars"].contains("alpha_star"));

    EXPECT_EQ(run("figure1 --config " + at("fig_bad.json") + " --out " + at("x.csv")), 2);
    EXPECT_NE(read_text(at("err.txt")).find("2 min(p,q,r) - gamma >= 0"), std::string::npos);
}

TEST_F(Cli, SeedOverrideAndOutputDirectory) {
    ASSERT_EQ(run("figure1 --config " + at("fig_config.json") + " --seed 12 --out " + at("fig12.csv")), 0);
    EXPECT_EQ(load_json(at("fig12.json"))["config"]["seed"], 12);
    EXPECT_NE(read_text(at("fig12.csv")), read_text(at("fig.csv")));
    fs::create_directories(dir() / "outdir");
    ASSERT_EQ(run("lift --input " + at("flat.csv") + " --levels 2", "RPSPT_OUT_DIR=" + at("outdir")), 0);
    EXPECT_TRUE(fs::exists(dir() / "outdir" / "lift_report.csv"));
    EXPECT_TRUE(fs::exists(dir() / "outdir" / "lift_report.manifest.json"));
}

TEST_F(Cli, RerunsAreByteIdentical) {
    struct Case {
        std::string args, out;
        std::vector<std::string> csvs;
    };
    std::vector<Case> cases = {
        {"lift --input " + at("bm.csv") + " --levels 4", "det_lift.csv", {"det_lift.csv", "det_lift_summary.csv"}},
        {"wealth --market " + at("prices.csv") + " --portfolio " + at("entropy.json"),
         "det_w.csv",
         {"det_w.csv", "det_w_master.csv", "det_w_master_report.csv"}},
        {"universal --market " + at("prices.csv") + " --family " + at("family.json") + " --T-grid 0.5,1",
         "det_u.csv",
         {"det_u.csv"}},
        {"figure1 --config " + at("fig_config.json"), "det_f.csv", {"det_f.csv", "det_f.json"}},
    };
    for (const auto& c : cases) {
        ASSERT_EQ(run(c.args + " --out " + at(c.out)), 0) << c.args;
        std::vector<std::string> first;
        for (const auto& f : c.csvs) first.push_back(read_text(at(f)));
        for (const auto& f : c.csvs) fs::remove(at(f));
        ASSERT_EQ(run(c.args + " --out " + at(c.out)), 0) << c.args;
        for (std::size_t i = 0; i < c.csvs.size(); ++i) {
            EXPECT_FALSE(first[i].empty()) << c.csvs[i];
            EXPECT_EQ(read_text(at(c.csvs[i])), first[i]) << c.csvs[i];
        }
    }
}
