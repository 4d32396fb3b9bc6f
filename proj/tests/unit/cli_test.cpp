#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "stark/cli/app.hpp"
#include "stark/cli/report.hpp"
#include "stark/errors.hpp"

using namespace stark;
using namespace stark::cli;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stark");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stark_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(LambdaGrid, LinspaceAndList) {
  const auto g = parse_lambda_grid("-2:3:9");
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g.front(), -2.0);
  EXPECT_EQ(g.back(), 3.0);
  EXPECT_DOUBLE_EQ(g[4], 0.5);
  EXPECT_EQ(parse_lambda_grid("1, 0.5 ,2"), (std::vector<double>{1.0, 0.5, 2.0}));
  EXPECT_EQ(parse_lambda_grid("0"), (std::vector<double>{0.0}));
  EXPECT_EQ(parse_lambda_grid("4:4:1"), (std::vector<double>{4.0}));
}

TEST(LambdaGrid, Malformed) {
  for (const char* bad : {"", "1:2", "1:2:0", "1:2:2.5", "a,b", "1,,2", "0:1:1"}) {
    EXPECT_THROW(parse_lambda_grid(bad), DomainError) << bad;
  }
}

TEST(Report, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e4}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Report, ConfigHashIsStableAndSensitive) {
  Json a{{"potential", "zero"}, {"Xi", 1e4}};
  Json b{{"potential", "zero"}, {"Xi", 1e3}};
  EXPECT_EQ(config_hash(a), config_hash(a));
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Report, SvgDropsUnplottablePoints) {
  PlotSpec spec{"t<1>", "x", "y", true, true, {{"s", {0.0, 1.0, 10.0, 100.0}, {1.0, NAN, 0.1, 0.01}}}};
  const std::string svg = svg_plot(spec);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("t&lt;1&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg_plot(PlotSpec{}).find("nan"), std::string::npos);
}

TEST(Cli, ZeroSurveyWritesOneAcVerdict) {
  const auto dir = scratch("zero");
  ASSERT_EQ(run_cli({"survey", "--potential", "zero", "--lambda", "0", "--Xi", "1e4", "--out", dir.string(),
                     "--csv", "--plots"}),
            0);
  const auto report = Json::parse(slurp(dir / "survey.json"));
  ASSERT_EQ(report["verdicts"].size(), 1u);
  EXPECT_EQ(report["verdicts"][0]["verdict"], "ac_consistent");
  EXPECT_EQ(report["version"], "0.1.0");
  EXPECT_EQ(report["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(report.contains("disclaimer"));
  for (const char* f : {"survey.conf", "survey_lambda000.csv", "survey_logR.svg", "survey_integral6.svg",
                        "survey_l2.svg"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const std::string csv = slurp(dir / "survey_lambda000.csv");
  EXPECT_NE(csv.find("config_hash=" + report["config_hash"].get<std::string>()), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, PowerLawGridGivesNineVerdicts) {
  const auto dir = scratch("grid");
  ASSERT_EQ(run_cli({"survey", "--potential", "power_law", "--A", "1", "--beta", "0.5", "--lambda", "-2:3:9", "--Xi",
                     "1e3", "--control-hi", "1e3", "--subordinacy-x", "300", "--out", dir.string()}),
            0);
  const auto report = Json::parse(slurp(dir / "survey.json"));
  EXPECT_EQ(report["verdicts"].size(), 9u);
  EXPECT_EQ(report["config"]["potential"], "power_law{A=1,beta=0.5}");
  fs::remove_all(dir);
}

TEST(Cli, UsageErrorsExitTwoWithoutFiles) {
  const auto dir = scratch("usage");
  EXPECT_EQ(run_cli({"survey", "--bogus", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"survey", "--potential", "nope", "--lambda", "0", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"survey", "--lambda", "1:2", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"survey", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"survey", "--lambda", "0", "--rtol", "0.1", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"tails", "fourier", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"tails", "power_phase", "--p", "1", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({}), 2);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, AllEnergiesFailingExitsOne) {
  const auto dir = scratch("fail");
  // A trajectory shorter than the diagnostic range fails at every energy.
  EXPECT_EQ(run_cli({"survey", "--lambda", "0,1", "--Xi", "1e3", "--control-hi", "1e3", "--tail-factor", "1",
                     "--subordinacy-x", "0", "--rtol", "1e-14", "--xi0", "1e-300", "--out", dir.string()}),
            1);
  fs::remove_all(dir);
}

TEST(Cli, TrajectoryDump) {
  const auto dir = scratch("trajectory");
  ASSERT_EQ(run_cli({"trajectory", "--potential", "zero", "--lambda", "0", "--Xi", "100", "--out", dir.string()}), 0);
  const std::string text = slurp(dir / "trajectory.csv");
  const auto rows = csv_rows(text);
  ASSERT_GT(rows.size(), 100u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"xi", "logR", "theta", "V", "b", "sigma", "gamma"}));
  double variation = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 7u);
    if (i > 1) variation += std::abs(std::stod(rows[i][1]) - std::stod(rows[i - 1][1]));
  }
  EXPECT_LE(variation, 5.0 / 72.0);

  ASSERT_EQ(run_cli({"trajectory", "--potential", "zero", "--lambda", "0", "--Xi", "100", "--out", dir.string(),
                     "--name", "again"}),
            0);
  EXPECT_EQ(slurp(dir / "again.csv"), text);
  fs::remove_all(dir);
}

TEST(Cli, TailsTables) {
  const auto dir = scratch("tails");
  ASSERT_EQ(run_cli({"tails", "power_phase", "--out", dir.string()}), 0);
  auto rows = csv_rows(slurp(dir / "tails.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"N", "re", "im", "abs", "truncation_error"}));
  EXPECT_LE(std::stod(rows[1][3]), 2.0 * std::pow(100.0, -2.0 / 3.0));

  ASSERT_EQ(run_cli({"tails", "power_phase", "--p", "-2", "--N", "10", "--out", dir.string(), "--name", "sq"}), 0);
  rows = csv_rows(slurp(dir / "sq.csv"));
  EXPECT_LE(std::stod(rows[1][3]), 0.1);

  ASSERT_EQ(run_cli({"tails", "cubic_phase", "--lambda", "1.3", "--out", dir.string(), "--name", "cubic"}), 0);
  const std::string cubic = slurp(dir / "cubic.csv");
  EXPECT_NE(cubic.find("# fitted_exponent="), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, SSetJson) {
  const auto dir = scratch("sset");
  ASSERT_EQ(run_cli({"sset", "--potential", "zero", "--lambda", "1", "--N", "50", "--out", dir.string()}), 0);
  auto j = Json::parse(slurp(dir / "sset.json"));
  ASSERT_EQ(j["records"].size(), 1u);
  EXPECT_EQ(j["records"][0]["mplus_estimate"], 0.0);

  ASSERT_EQ(run_cli({"sset", "--potential", "power_law{A=1,beta=0.5}", "--lambda", "1", "--N", "100,200,400",
                     "--out", dir.string(), "--name", "pl"}),
            0);
  j = Json::parse(slurp(dir / "pl.json"));
  ASSERT_EQ(j["records"].size(), 3u);
  const double m0 = j["records"][0]["mplus_estimate"];
  const double m2 = j["records"][2]["mplus_estimate"];
  EXPECT_NEAR(m2 / m0, 1.0, 0.2);
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileRerunIsByteIdentical) {
  const auto a = scratch("config_a");
  const auto b = scratch("config_b");
  ASSERT_EQ(run_cli({"survey", "--potential", "resonant{A=0.5}", "--lambda", "0,1", "--Xi", "1e3", "--control-hi",
                     "1e3", "--subordinacy-x", "200", "--out", a.string(), "--csv"}),
            0);
  ASSERT_EQ(run_cli({"survey", "--config", (a / "survey.conf").string(), "--out", b.string(), "--csv", "--threads",
                     "3"}),
            0);
  for (const char* f : {"survey.json", "survey.conf", "survey_lambda000.csv", "survey_lambda001.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("env");
  ::setenv("STARK_OUT_DIR", dir.string().c_str(), 1);
  EXPECT_EQ(run_cli({"tails", "power_phase", "--N", "100"}), 0);
  ::unsetenv("STARK_OUT_DIR");
  EXPECT_TRUE(fs::exists(dir / "tails.csv"));
  fs::remove_all(dir);
}

TEST(Cli, Presets) { EXPECT_EQ(run_cli({"presets"}), 0); }
