#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "bsvi/config.hpp"
#include "bsvi/errors.hpp"

using namespace bsvi;

namespace {

StudyConfig from_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

struct Outcome {
    int code;
    std::string out;
};

Outcome run_lab(const std::string& args) {
    const std::string cmd = std::string("\"") + BSVI_LAB_PATH + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string config_path(const std::string& name) { return std::string(BSVI_CONFIG_DIR) + "/" + name; }

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(Config, ParsesAllSections) {
    const auto c = from_text(
        "; comment\n[problem]\nname = gbm\nmu = 0.1\nphi = abs:1\n"
        "[scheme]\na = 0.25\npaths = 123\nestimator = binning\nbins = 7\nvariant = explicit\nseed = 99\n"
        "law = rademacher\ntol = 1e-10\nmax_iter = 40\ntree_cap = 12\nclip = true\nworkers = 2\n"
        "[study]\nn = 4, 8, 16\nreference = self:64\nquantity = backward\nreplicates = 2\n");
    EXPECT_EQ(c.problem, "gbm");
    EXPECT_EQ(c.problem_params.at("mu"), "0.1");
    EXPECT_EQ(c.scheme.a_exponent, 0.25);
    EXPECT_EQ(c.scheme.num_paths, 123u);
    EXPECT_EQ(std::get<Binning>(c.scheme.estimator).bins, 7u);
    EXPECT_EQ(c.scheme.variant, SchemeVariant::explicit_);
    EXPECT_EQ(c.scheme.seed, 99u);
    EXPECT_EQ(c.scheme.law, IncrementLaw::rademacher);
    EXPECT_EQ(c.scheme.fixed_point_tol, 1e-10);
    EXPECT_EQ(c.scheme.fixed_point_max_iter, 40);
    EXPECT_EQ(c.scheme.tree_cap, 12u);
    EXPECT_TRUE(c.scheme.clip_to_range);
    EXPECT_EQ(c.scheme.workers, 2u);
    EXPECT_EQ(c.n_list, (std::vector<std::size_t>{4, 8, 16}));
    EXPECT_EQ(c.reference.kind, ReferenceMode::Kind::self);
    EXPECT_EQ(c.reference.n_ref, 64u);
    EXPECT_EQ(c.replicates, 2u);
}

TEST(Config, Defaults) {
    const auto c = from_text("[problem]\nname = martingale\n[study]\nn = [8]\nreference = analytic:martingale\n");
    EXPECT_EQ(c.scheme.num_paths, SchemeParams{}.num_paths);
    EXPECT_EQ(c.quantity, Quantity::backward);
    EXPECT_EQ(c.replicates, 1u);
    EXPECT_EQ(c.reference.name, "martingale");
}

TEST(Config, Rejections) {
    const std::string ok_study = "[study]\nn = [8]\nreference = self:16\n";
    EXPECT_THROW(from_text("[problem]\nname = gbm\nbogus = 1\n" + ok_study), ConfigError);
    EXPECT_THROW(from_text("[problem]\nname = gbm\n[scheme]\npaths = -3\n" + ok_study), ConfigError);
    EXPECT_THROW(from_text("[problem]\nname = gbm\n[scheme]\nestimator = magic\n" + ok_study), ConfigError);
    EXPECT_THROW(from_text("[problem]\nname = gbm\n[extra]\nx = 1\n" + ok_study), ConfigError);
    EXPECT_THROW(from_text("stray = 1\n[problem]\nname = gbm\n" + ok_study), ConfigError);
    EXPECT_THROW(from_text("[problem]\nname = gbm\n[study]\nn = [8]\nreference = exact\n"), ConfigError);
    EXPECT_THROW(from_text("[problem]\nname = gbm\n[study]\nn = [8, x]\nreference = self:16\n"), ConfigError);
    EXPECT_THROW(from_text("[problem]\nname = gbm\nmu = 1\nmu = 2\n" + ok_study), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/path.ini"), ConfigError);
}

TEST(Cli, ListProblems) {
    const auto r = run_lab("list-problems");
    EXPECT_EQ(r.code, 0);
    for (const char* name : {"gbm", "martingale", "linear_decay", "abs_payoff", "nonlinear", "reflected_drift"})
        EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST(Cli, RunWritesCsv) {
    const auto r = run_lab("run \"" + config_path("linear_decay.ini") + "\"");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("n,h,eps,error_Y_sup,error_Z_l2,error_Y_l2,spread,wall_time\n", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST(Cli, RunOverridesAndOutFile) {
    const auto out = std::filesystem::temp_directory_path() / "bsvi_cli_report.csv";
    const auto r = run_lab("run \"" + config_path("gbm_forward.ini") + "\" --paths 200 --seed 5 --out \"" +
                           out.string() + "\"");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("rate X"), std::string::npos);
    std::ifstream is(out);
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "n,h,error_X_strong,spread,wall_time");
}

TEST(Cli, OracleCheckPasses) {
    const auto r = run_lab("oracle-check \"" + config_path("nonlinear.ini") + "\"");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_lab("run /nonexistent.ini").code, 2);
    const auto bad = temp_file("bsvi_bad_ref.ini",
                               "[problem]\nname = martingale\n[study]\nn = [8]\nreference = self:12\n");
    EXPECT_EQ(run_lab("run \"" + bad.string() + "\"").code, 2);
    const auto reflected = temp_file("bsvi_reflected_oracle.ini",
                                     "[problem]\nname = reflected_drift\n[study]\nn = [8]\nreference = self:16\n");
    EXPECT_EQ(run_lab("oracle-check \"" + reflected.string() + "\"").code, 3);
    EXPECT_NE(run_lab("frobnicate").code, 0);
}
