// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <udmcode/cli.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "udmcode");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = udm::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("udmcode_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST(Cli, ConstructWritesCollectionAndWorkerFiles) {
    const auto dir = scratch("construct");
    const auto r = run({"construct", "--construction", "udm-companion", "-N", "6", "--delta", "4", "--ell", "3", "--field",
                        "2^3", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("x^3 + x + 1"), std::string::npos);
    EXPECT_NE(r.out.find("config hash: "), std::string::npos);
    const json doc = json::parse(slurp(dir / "collection.json"));
    EXPECT_EQ(doc["command"], "construct");
    EXPECT_EQ(doc["config_hash"].get<std::string>().size(), 16U);
    EXPECT_EQ(doc["result"]["meta"]["s"], 3);
    for (int k = 0; k < 6; ++k) EXPECT_TRUE(fs::exists(dir / ("worker_" + std::to_string(k) + ".csv")));
}

TEST(Cli, OutputIsByteIdenticalOnRerun) {
    const auto a = scratch("rerun_a");
    const auto b = scratch("rerun_b");
    for (const auto& d : {a, b})
        ASSERT_EQ(run({"analyze", "--construction", "rs-real", "-N", "6", "--delta", "4", "--ell", "3", "--out", d.string()}).code, 0);
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    EXPECT_EQ(slurp(a / "table.txt"), slurp(b / "table.txt"));
    const json doc = json::parse(slurp(a / "report.json"));
    EXPECT_EQ(doc["config_hash"], udm::fnv1a_hex(doc["config"].dump()));
}

TEST(Cli, ConfigHashTracksTheConfig) {
    const auto one = run({"construct", "--construction", "rs-real", "-N", "6", "--delta", "4", "--ell", "3", "--json"});
    const auto two = run({"construct", "--construction", "rs-real", "-N", "6", "--delta", "4", "--ell", "2", "--json"});
    ASSERT_EQ(one.code, 0);
    ASSERT_EQ(two.code, 0);
    EXPECT_NE(json::parse(one.out)["config_hash"], json::parse(two.out)["config_hash"]);
}

TEST(Cli, TablesHaveOneRowPerScheme) {
    const auto t1 = run({"analyze", "--table", "1"});
    ASSERT_EQ(t1.code, 0) << t1.err;
    const auto t1_table = t1.out.substr(0, t1.out.find("patterns:"));
    EXPECT_EQ(std::count(t1_table.begin(), t1_table.end(), '\n'), 2 + 8);
    EXPECT_NE(t1.out.find("UDM + Companion Matrix of GF(2^3)"), std::string::npos);
    const auto t2 = run({"analyze", "--table", "2", "--no-certify"});
    ASSERT_EQ(t2.code, 0) << t2.err;
    const auto t2_table = t2.out.substr(0, t2.out.find("patterns:"));
    EXPECT_EQ(std::count(t2_table.begin(), t2_table.end(), '\n'), 2 + 6);
    EXPECT_EQ(run({"analyze", "--table", "3"}).code, 4);
    EXPECT_EQ(run({"analyze", "--table", "1", "--construction", "rs-real"}).code, 4);
}

TEST(Cli, VerifyPassAndFailFixtures) {
    const auto dir = scratch("verify");
    const json good = {{"construction", "udm-real"}, {"N", 6}, {"delta", 4}, {"ell", 3}};
    write(dir / "good.json", good.dump());
    const auto pass = run({"verify", "--scheme", (dir / "good.json").string(), "--mode", "full"});
    EXPECT_EQ(pass.code, 0) << pass.err;
    EXPECT_EQ(pass.out.rfind("PASS", 0), 0U);

    json bad = udm::to_json(udm::mod2_hasse_counterexample());
    write(dir / "bad.json", bad.dump());
    const auto fail = run({"verify", "--scheme", (dir / "bad.json").string(), "--out", dir.string()});
    EXPECT_EQ(fail.code, 2);
    EXPECT_NE(fail.out.find("(2,2)"), std::string::npos);
    EXPECT_EQ(json::parse(slurp(dir / "verdict.json"))["result"]["passed"], false);
    EXPECT_EQ(run({"verify", "--scheme", (dir / "bad.json").string(), "--numerical"}).code, 2);
    EXPECT_EQ(run({"analyze", "--scheme", (dir / "bad.json").string()}).code, 2);

    // a collection written by construct verifies too
    ASSERT_EQ(run({"construct", "--construction", "udm-companion", "-N", "6", "--delta", "4", "--ell", "3", "--field", "3^2",
                   "--out", dir.string()})
                  .code,
              0);
    EXPECT_EQ(run({"verify", "--scheme", (dir / "collection.json").string()}).code, 0);
    EXPECT_EQ(run({"verify", "--scheme", (dir / "collection.json").string(), "--numerical"}).code, 4);
}

TEST(Cli, ConfigErrorsExitWithFour) {
    const auto dir = scratch("config");
    write(dir / "typo.json", R"({"construction":"rs-real","N":6,"delta":4,"ell":3,"betta":[1]})");
    EXPECT_EQ(run({"construct", "--scheme", (dir / "typo.json").string()}).code, 4);
    write(dir / "broken.json", "{not json");
    EXPECT_EQ(run({"construct", "--scheme", (dir / "broken.json").string()}).code, 4);
    EXPECT_EQ(run({"construct", "--construction", "udm-ff", "-N", "6", "--delta", "4", "--ell", "3", "--field", "2^2"}).code, 4);
    EXPECT_EQ(run({"construct", "--construction", "udm-companion", "-N", "6", "--delta", "4", "--ell", "3"}).code, 4);
    EXPECT_EQ(run({"construct"}).code, 4);
    EXPECT_EQ(run({"frobnicate"}).code, 4);
    EXPECT_EQ(run({"analyze", "--construction", "rs-real", "-N", "6", "--delta", "4", "--ell", "3", "--mode", "sideways"}).code,
              4);
    EXPECT_EQ(run({"construct", "--scheme", (dir / "typo.json").string(), "--construction", "rs-real"}).code, 4);
    // full enumeration of a large space is refused unless the budget allows it
    EXPECT_EQ(run({"analyze", "--construction", "udm-companion", "-N", "15", "--delta", "4", "--ell", "2", "--field", "2^4",
                   "--mode", "full", "--budget", "1000"})
                  .code,
              4);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, StrictBoundChangesTheReport) {
    const auto incl = run({"analyze", "--construction", "rs-real", "-N", "6", "--delta", "4", "--ell", "3", "--json"});
    const auto strict = run({"analyze", "--construction", "rs-real", "-N", "6", "--delta", "4", "--ell", "3", "--strict-psi", "--json"});
    ASSERT_EQ(incl.code, 0);
    ASSERT_EQ(strict.code, 0);
    EXPECT_EQ(json::parse(incl.out)["result"]["reports"][0]["pattern_count"], 120);
    EXPECT_EQ(json::parse(strict.out)["result"]["reports"][0]["pattern_count"], 90);
}

TEST(Cli, MultiplyFromFiles) {
    const auto dir = scratch("multiply");
    write(dir / "a.csv", "# 6x3\n1,2,3\n4,5,6\n7,8,9\n1,0,0\n0,1,0\n0,0,1\n");
    write(dir / "x.txt", "1\n-1\n2\n");
    const auto r = run({"multiply", "--construction", "udm-real", "-N", "6", "--delta", "3", "--ell", "2", "--matrix",
                        (dir / "a.csv").string(), "--vector", (dir / "x.txt").string(), "--budgets", "2,0,1,0,0,0", "--out",
                        dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ax = udm::read_vector((dir / "ax.txt").string());
    const Eigen::VectorXd want = (Eigen::VectorXd(6) << 5, 11, 17, 1, -1, 2).finished();
    ASSERT_EQ(ax.size(), 6);
    EXPECT_LT((ax - want).norm(), 1e-10);
    const json trace = json::parse(slurp(dir / "trace.json"));
    EXPECT_LT(trace["result"]["relative_error"].get<double>(), 1e-10);

    write(dir / "a.tri", "6 3\n0 0 1\n5 2 4\n");
    const auto sp = run({"multiply", "--construction", "rs-real", "-N", "6", "--delta", "3", "--ell", "2", "--sparse",
                         (dir / "a.tri").string(), "--vector", (dir / "x.txt").string()});
    ASSERT_EQ(sp.code, 0) << sp.err;
    EXPECT_EQ(run({"multiply", "--construction", "rs-real", "-N", "6", "--delta", "3", "--ell", "2", "--vector",
                   (dir / "x.txt").string()})
                  .code,
              4);
}

TEST(Cli, SimulateExitCodes) {
    const std::vector<std::string> base = {"simulate", "--construction", "udm-companion", "-N", "6", "--delta", "4", "--ell", "3",
                                           "--field", "2^3", "--seed", "5"};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    };
    EXPECT_EQ(with({}).code, 0);
    EXPECT_EQ(with({"--rates", "1,2,0.5,1,1,3"}).code, 0);
    EXPECT_EQ(with({"--budgets", "9,3,2,2,2,2"}).code, 0);
    EXPECT_EQ(with({"--budgets", "2,2,2,2,2,2"}).code, 3);
    EXPECT_EQ(with({"--rates", "1,0,0,0,0,0"}).code, 3);
    EXPECT_EQ(with({"--budgets", "1,2"}).code, 4);
    EXPECT_EQ(with({"--budgets", "10,0,0,0,0,0"}).code, 4);
    EXPECT_EQ(with({"--fill", "0"}).code, 4);
    // same seed, same trace
    const auto a = with({"--rates", "1,2,0.5,1,1,3", "--json"});
    const auto b = with({"--rates", "1,2,0.5,1,1,3", "--json"});
    EXPECT_EQ(a.out, b.out);
    const auto all = with({"--all-workers", "--json"});
    ASSERT_EQ(all.code, 0);
    EXPECT_EQ(json::parse(all.out)["result"]["trace"]["total_products"], 54);
}

TEST(Cli, SingularPatternIsAnInfeasibleDecode) {
    const auto dir = scratch("singular");
    write(dir / "bad.json", udm::to_json(udm::mod2_hasse_counterexample()).dump());
    EXPECT_EQ(run({"simulate", "--scheme", (dir / "bad.json").string(), "--rows", "8", "--cols", "3"}).code, 3);
}

TEST(Readers, DenseCsvAndTriplets) {
    const auto dir = scratch("readers");
    const auto m = udm::read_dense_csv(write(dir / "m.csv", "% comment\n1, 2\n3;4\n\n5 6\n").string());
    ASSERT_EQ(m.rows(), 3);
    ASSERT_EQ(m.cols(), 2);
    EXPECT_EQ(m(2, 1), 6.0);
    EXPECT_THROW((void)udm::read_dense_csv(write(dir / "ragged.csv", "1,2\n3\n").string()), udm::ConfigError);
    EXPECT_THROW((void)udm::read_dense_csv(write(dir / "nan.csv", "1,abc\n").string()), udm::ConfigError);
    EXPECT_THROW((void)udm::read_dense_csv((dir / "missing.csv").string()), udm::ConfigError);

    const auto t = udm::read_triplets(write(dir / "t.txt", "4 5\n0 0 1.5\n3 4 -2\n").string());
    EXPECT_EQ(t.rows(), 4);
    EXPECT_EQ(t.cols(), 5);
    EXPECT_EQ(t.coeff(3, 4), -2.0);
    EXPECT_THROW((void)udm::read_triplets(write(dir / "oob.txt", "2 2\n2 0 1\n").string()), udm::ConfigError);

    const auto v = udm::read_vector(write(dir / "v.txt", "1\n2.5\n# skip\n-3\n").string());
    ASSERT_EQ(v.size(), 3);
    EXPECT_EQ(v(1), 2.5);
}

TEST(Format, TwoSignificantFigures) {
    EXPECT_EQ(udm::two_significant(4988.4), "5.0e+03");
    EXPECT_EQ(udm::two_significant(653.0), "650");
    EXPECT_EQ(udm::two_significant(54.79), "55");
    EXPECT_EQ(udm::two_significant(1.0), "1.0");
    EXPECT_EQ(udm::two_significant(0.0123), "0.012");
    EXPECT_EQ(udm::two_significant(999.6), "1.0e+03");
    EXPECT_EQ(udm::two_significant(9.96), "10");
    EXPECT_EQ(udm::two_significant(99.5), "100");
    EXPECT_EQ(udm::two_significant(std::numeric_limits<double>::infinity()), "inf");
}
