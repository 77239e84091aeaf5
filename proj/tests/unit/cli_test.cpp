#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "commands.hpp"
#include "qspec_io.hpp"

namespace qspec {
namespace {

namespace fs = std::filesystem;
using io::json;

struct Outcome {
    int code = -1;
    json report;
    std::string err;
};

Outcome qspec(std::vector<std::string> args) {
    args.insert(args.begin(), "qspec");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.err = err.str();
    // the last line of stdout is the JSON report
    const std::string text = out.str();
    const size_t start = text.find('{');
    if (start != std::string::npos) o.report = json::parse(text.substr(start));
    return o;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qspec_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
                std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const json& j) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << j.dump();
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static json n3_problem(int points) {
        return {{"n", 3},
                {"class", "n3-mixed"},
                {"grid_points", points},
                {"coefficients",
                 {{"tau1", {{"kind", "expr"}, {"tokens", {"cos:0.4:2"}}}},
                  {"sigma0", {{"kind", "expr"}, {"tokens", {"sin:0.2:1"}}}}}}};
    }
    static json dirichlet_problem(int points) {
        return {{"n", 2}, {"class", "schrodinger-n2"}, {"grid_points", points}};
    }

    fs::path dir_;
};

TEST_F(Cli, UsageErrorsExit64) {
    Outcome o = qspec({});
    EXPECT_EQ(o.code, cli::kConfig);
    EXPECT_EQ(o.report["status"], "error");
    EXPECT_EQ(o.report["kind"], "usage");

    o = qspec({"forward", "--config", path("x.json"), "--levels", "many"});
    EXPECT_EQ(o.code, cli::kConfig);

    o = qspec({"forward", "--config", path("x.json"), "--levels", "0"});
    EXPECT_EQ(o.code, cli::kConfig);
}

TEST_F(Cli, MalformedConfigNamesTheField) {
    json bad = n3_problem(65);
    bad["coefficients"]["tau1"]["tokens"] = {"cos:0.4:zz"};
    const Outcome o = qspec({"forward", "--config", write("bad.json", bad), "--out", path("d.json")});
    EXPECT_EQ(o.code, cli::kConfig);
    EXPECT_EQ(o.report["kind"], "config");
    EXPECT_EQ(o.report["exit_code"], cli::kConfig);
    EXPECT_NE(o.report["message"].get<std::string>().find("problem.coefficients.tau1.tokens"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("d.json")));
}

TEST_F(Cli, MissingInputExit66) {
    const Outcome o = qspec({"invert", "--data", path("none.json"), "--out", path("r.csv")});
    EXPECT_EQ(o.code, cli::kNoInput);
    EXPECT_EQ(o.report["kind"], "input");
}

TEST_F(Cli, ForwardWritesEveryLevelAndColumn) {
    const Outcome o =
        qspec({"forward", "--config", write("n3.json", n3_problem(201)), "--levels", "5", "--out", path("d.json"),
               "--diagnostics"});
    ASSERT_EQ(o.code, cli::kOk) << o.report.dump();
    EXPECT_EQ(o.report["class_w"]["ok"], true);
    const json d = io::read_json(path("d.json"));
    EXPECT_EQ(d["L"], 5);
    EXPECT_EQ(d["data"].size(), 10u);
    EXPECT_EQ(d["data"][3]["l"], 2);
    EXPECT_EQ(d["data"][3]["k"], 2);
    EXPECT_EQ(d["data"][0]["N"]["kind"], "subdiagonal");
    const json diag = io::read_json(path("d.report.json"));
    EXPECT_EQ(diag["data"].size(), 10u);
    EXPECT_LT(diag["data"][9]["predictor_relative_error"].get<double>(), 0.05);
}

TEST_F(Cli, DirichletLadder) {
    const Outcome o =
        qspec({"forward", "--config", write("n2.json", dirichlet_problem(401)), "--levels", "6", "--out", path("d.json")});
    ASSERT_EQ(o.code, cli::kOk);
    const SpectralData d = io::read_spectral(path("d.json"));
    for (int l = 1; l <= 6; ++l) {
        const double want = -std::pow(std::numbers::pi * l, 2);
        EXPECT_LT(std::abs(d.at(l, 1).lambda - want), 1e-8 * std::abs(want));
    }
}

TEST_F(Cli, ForwardIsDeterministic) {
    const std::string cfg = write("n3.json", n3_problem(101));
    ASSERT_EQ(qspec({"forward", "--config", cfg, "--levels", "4", "--out", path("a.json")}).code, cli::kOk);
    ASSERT_EQ(qspec({"forward", "--config", cfg, "--levels", "4", "--out", path("b.json")}).code, cli::kOk);
    std::ifstream a(path("a.json")), b(path("b.json"));
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(Cli, InvertWarnsWhenTruncationIsClipped) {
    const std::string cfg = write("n3.json", n3_problem(201));
    ASSERT_EQ(qspec({"forward", "--config", cfg, "--levels", "5", "--out", path("d.json")}).code, cli::kOk);
    const Outcome o = qspec({"invert", "--data", path("d.json"), "--config", cfg, "--out", path("r.csv"),
                             "--diagnostics"});
    ASSERT_EQ(o.code, cli::kOk) << o.report.dump();
    EXPECT_EQ(o.report["truncation"], 5);
    ASSERT_EQ(o.report["warnings"].size(), 1u);
    EXPECT_NE(o.report["warnings"][0].get<std::string>().find("truncation clipped"), std::string::npos);
    EXPECT_TRUE(o.report["errors"].contains("tau1"));
    EXPECT_TRUE(fs::exists(path("r.csv")));
    EXPECT_TRUE(fs::exists(path("r.report.json")));
    EXPECT_TRUE(fs::exists(path("r.main_equation_report.json")));
}

TEST_F(Cli, InvertRejectsModelOfWrongShape) {
    const std::string cfg = write("n3.json", n3_problem(101));
    ASSERT_EQ(qspec({"forward", "--config", cfg, "--levels", "3", "--out", path("d.json")}).code, cli::kOk);
    // a non-constant tau1 is not an admissible first-step model
    const Outcome o = qspec({"invert", "--data", path("d.json"), "--model", cfg, "--out", path("r.csv")});
    EXPECT_EQ(o.code, cli::kConfig);
    EXPECT_NE(o.report["message"].get<std::string>().find("model"), std::string::npos);
}

TEST_F(Cli, RoundtripWritesSpectralSidecar) {
    const Outcome o = qspec({"roundtrip", "--config", write("n3.json", n3_problem(201)), "--levels", "6",
                             "--truncation", "6", "--out", path("rt.csv")});
    ASSERT_EQ(o.code, cli::kOk) << o.report.dump();
    EXPECT_TRUE(fs::exists(path("rt.spectral_data.json")));
    EXPECT_LT(o.report["errors"]["tau1"].get<double>(), 1.0);
}

TEST_F(Cli, VerifyPassesOnDirichletProblem) {
    const Outcome o = qspec({"verify", "--config", write("n2.json", dirichlet_problem(201)), "--levels", "8",
                             "--truncation", "8", "--out", path("v.json")});
    EXPECT_EQ(o.code, cli::kOk) << o.report.dump(2);
    EXPECT_EQ(o.report["status"], "ok");
    EXPECT_EQ(o.report["checks"].size(), 10u);
    EXPECT_TRUE(fs::exists(path("v.json")));
}

TEST_F(Cli, OutputOverInputRefused) {
    const std::string cfg = write("n3.json", n3_problem(65));
    const Outcome o = qspec({"forward", "--config", cfg, "--out", cfg});
    EXPECT_EQ(o.code, cli::kConfig);
}

TEST_F(Cli, UnwritableOutputExit73) {
    const Outcome o = qspec({"forward", "--config", write("n3.json", n3_problem(65)), "--levels", "2", "--out",
                             "/nonexistent/qspec/d.json"});
    EXPECT_EQ(o.code, cli::kCantCreate);
    EXPECT_EQ(o.report["kind"], "output");
}

}  // namespace
}  // namespace qspec
