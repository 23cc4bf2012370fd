#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Result run(const std::string& args) {
    const std::string err_path = testing::TempDir() + "ruinctl_stderr.txt";
    const std::string cmd = std::string(RUINCTL) + " " + args + " 2>" + err_path;
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_path);
    return r;
}

std::string data(const std::string& name) { return std::string(RUIN_TEST_DATA) + "/" + name; }

std::vector<std::vector<std::string>> csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Cli, ValidateBundledConfig) {
    const Result r = run(std::string("validate --model ") + RUIN_TABLE_CONFIG);
    EXPECT_EQ(r.code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["status"], "valid");
}

TEST(Cli, DriftViolation) {
    const Result v = run("validate --model " + data("negative_drift.json"));
    EXPECT_EQ(v.code, 1);
    EXPECT_EQ(nlohmann::json::parse(v.out)["status"], "invalid");
    const Result a = run("asymptotics --model " + data("negative_drift.json"));
    EXPECT_EQ(a.code, 1);
    EXPECT_NE(a.err.find("drift condition violated"), std::string::npos);
    EXPECT_TRUE(a.out.empty());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("simulate --model " + data("two_state_q075.json") + " --u 5 --bogus 1").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("simulate --model " + data("two_state_q075.json") + " --u 5 --method exact").code, 1);
    EXPECT_EQ(run("bound --model " + data("unknown_field.json")).code, 1);
    EXPECT_EQ(run("bound --model " + data("malformed.json")).code, 1);
    EXPECT_EQ(run("bound --model " + data("does_not_exist.json")).code, 3);
    EXPECT_EQ(run("--help").code, 0);

    // pure drift: no exponential moment ever reaches zero, so omega* does not exist
    const std::string path = testing::TempDir() + "pure_drift.json";
    std::ofstream(path) << R"({"q": 1, "states": [{"p": 1, "r": 1, "sigma2": 0, "lambda": 0,
                             "claims": {"type": "exponential", "mu": 1}}]})";
    const Result r = run("asymptotics --model " + path);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("does not exist"), std::string::npos);
}

TEST(Cli, Asymptotics) {
    const Result r = run("asymptotics --model " + data("two_state_q075.json") + " --u 175 --u 125");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_NEAR(doc["omega_star"].get<double>(), 0.0486, 0.001);
    EXPECT_NEAR(doc["values"][0]["approx"].get<double>(), 1.89e-4, 0.02 * 1.89e-4);
    EXPECT_NEAR(doc["values"][1]["approx"].get<double>(), 2.14e-3, 0.02 * 2.14e-3);
    EXPECT_EQ(doc["pi_bar"].size(), 2u);
    EXPECT_GT(doc["alpha_star"].get<double>(), 0.0);

    const Result single = run("asymptotics --model " + data("single.json"));
    ASSERT_EQ(single.code, 0);
    EXPECT_TRUE(nlohmann::json::parse(single.out)["alpha_star"].is_null());
}

TEST(Cli, SpectrumDump) {
    const std::string path = testing::TempDir() + "spectrum.csv";
    const Result r = run("asymptotics --model " + data("three_state.json") + " --spectrum-csv " + path +
                         " --points 40 --quiet");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv(slurp(path));
    ASSERT_EQ(rows.size(), 41u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"alpha", "theta_1", "theta_2", "theta_3"}));
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(rows[k].size(), 4u);
    EXPECT_EQ(run("asymptotics --model " + data("three_state.json") + " --spectrum-csv /nonexistent/dir/x.csv").code,
              3);
}

TEST(Cli, Bound) {
    const Result r = run("bound --model " + data("two_state_q075.json") + " --u 175 --u 0");
    ASSERT_EQ(r.code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_NEAR(doc["bounds"][0]["bound"].get<double>(), 2.11e-4, 0.02 * 2.11e-4);
    EXPECT_EQ(doc["bounds"][1]["bound"].get<double>(), 1.0);
    EXPECT_EQ(doc["gamma"].size(), 2u);
    EXPECT_GT(doc["Omega"].get<double>(), 1.0);
    const Result c = run("bound --model " + data("two_state_q075.json") + " --u 175 --format csv");
    const auto rows = csv(c.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"u", "omega_star", "Omega", "bound"}));
}

TEST(Cli, SimulateIsDeterministic) {
    const std::string args = "simulate --model " + data("two_state_q075.json") + " --u 50 --runs 400 --seed 4 --quiet";
    const Result a = run(args);
    const Result b = run(args + " --jobs 2");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_TRUE(a.err.empty());
    const auto doc = nlohmann::json::parse(a.out);
    for (const char* key : {"mean", "se", "ci", "runs", "rel_err"}) EXPECT_TRUE(doc.contains(key)) << key;
    EXPECT_EQ(doc["runs"], 400);
    EXPECT_LE(doc["ci"][0].get<double>(), doc["mean"].get<double>());
    EXPECT_EQ(run(args + " --method crude --format csv").code, 0);
    EXPECT_EQ(run("simulate --model " + data("two_state_q075.json") + " --u 50 --runs 1").code, 1);
}

TEST(Cli, TableOne) {
    const Result r = run("table --which 1 --runs 50 --quiet --format csv");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv(r.out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"q", "u", "exact", "exact_se", "thm31", "thm42", "no_modulation"}));
    EXPECT_EQ(rows[3][0], "3");
    EXPECT_NEAR(std::stod(rows[3][4]), 1.86e-5, 0.02 * 1.86e-5);
    EXPECT_NEAR(std::stod(rows[3][5]), 1.98e-5, 0.02 * 1.98e-5);
}

TEST(Cli, TableTwoJson) {
    const Result r = run("table --which 2 --runs 100 --quiet");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc.size(), 5u);
    EXPECT_EQ(doc[0]["u"].get<double>(), 175.0);
    EXPECT_EQ(doc[4]["u"].get<double>(), 125.0);
    EXPECT_NEAR(doc[4]["thm31"].get<double>(), 2.14e-3, 0.02 * 2.14e-3);
    EXPECT_EQ(run("table --which 3").code, 1);
}
