#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "carnot/cli.hpp"

using namespace carnot;

namespace {

struct result {
  int code;
  std::string out, err;
};

result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string line_after(const std::string& text, const std::string& prefix) {
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  return {};
}

const char* heisenberg_spec = R"(# Heisenberg
dim = 3
labels = X Y Z
brackets:
  1 2 3 1
splitting.y = 2, 3
splitting.x = 1
splitting.n1 = 1
)";

}  // namespace

TEST(GroupSpec, ParsesHandWrittenFile) {
  auto g = parse_group_spec(heisenberg_spec);
  EXPECT_EQ(g.algebra, catalog::heisenberg().model.algebra);
  EXPECT_EQ(g.split, (adapted_splitting{{1, 2}, {0}, 1}));
  EXPECT_FALSE(g.first_layer.has_value());
}

TEST(GroupSpec, RoundTripsEveryCatalogEntry) {
  for (auto e : {catalog::heisenberg(), catalog::f23(), catalog::f24(), catalog::n6_2_5a(), catalog::eng(1),
                 catalog::eng(3), catalog::potential({"x1^2 - x2", "x1*x2 + 1/2"})}) {
    auto text = export_group_spec(e.model.algebra, e.model.split(), e.first_layer, e.name);
    auto g = parse_group_spec(text);
    EXPECT_EQ(g.algebra, e.model.algebra) << e.name;
    EXPECT_EQ(g.split, e.model.split());
    EXPECT_EQ(g.first_layer, std::optional(e.first_layer));
  }
}

TEST(GroupSpec, MissingSplittingY) {
  std::string text = heisenberg_spec;
  text = std::regex_replace(text, std::regex("splitting.y = 2, 3\n"), "");
  EXPECT_THROW(parse_group_spec(text), parse_error);
}

TEST(GroupSpec, ReportsLineNumbers) {
  try {
    parse_group_spec("dim = 3\nbrackets:\n  1 2 3\n");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_group_spec("dim = 3\nbrackets:\n  1 2 3 1/0\n");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_group_spec("dim = 3\ncolour = red\n");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_group_spec("dim = 3\nbrackets:\n  1 2 4 1\nsplitting.y = 2 3\nsplitting.x = 1\n"), parse_error);
  EXPECT_THROW(parse_group_spec("dim = 3\nbrackets:\n  0 2 3 1\n"), parse_error);
  EXPECT_THROW(parse_group_spec("dim = 3\ndim = 3\n"), parse_error);
}

TEST(GroupSpec, JacobiViolationCarriesTriple) {
  const char* text = R"(dim = 5
brackets:
  1 2 3 1
  2 3 4 1
  1 4 5 1
splitting.y = 3 4 5
splitting.x = 1 2
)";
  try {
    parse_group_spec(text);
    FAIL();
  } catch (const jacobi_violation& e) {
    EXPECT_EQ(e.a(), 0u);
    EXPECT_EQ(e.b(), 1u);
    EXPECT_EQ(e.c(), 2u);
  }
}

TEST(GroupSpec, RejectsMetricAndBadSplitting) {
  std::string text = std::string(heisenberg_spec) + "metric = 2 0 0 1\n";
  EXPECT_THROW(parse_group_spec(text), unsupported_metric);
  std::string swapped = std::regex_replace(std::string(heisenberg_spec), std::regex("splitting.x = 1"), "splitting.x = 2");
  EXPECT_THROW(parse_group_spec(swapped), bad_partition);
  EXPECT_THROW(parse_group_spec(std::string(heisenberg_spec) + "stratification.v1 = 1\n"), not_stratifiable);
}

TEST(Cli, ReduceCartanAtUnitMomentum) {
  auto r = run({"reduce", "f23", "--mu", "1,1,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  variable_space s{2, 0};
  EXPECT_EQ(parse_polynomial(line_after(r.out, "H_mu = "), s),
            parse_polynomial("1/2*p_x1^2 + 1/2*(p_x2 + x1 + x1^2/2 + x1*x2)^2", s));
}

TEST(Cli, ReduceSymbolicUsesGolden) {
  auto r = run({"reduce", "eng", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_after(r.out, "H_mu = "), symbolic_text(catalog::eng(3).golden_polynomial()));
}

TEST(Cli, CutTimeHeisenberg) {
  auto r = run({"cut-time", "heisenberg", "--mu", "0,1", "--p0", "1", "--x0", "0", "--T", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(line_after(r.out, "period L = ")), 2 * std::numbers::pi, 1e-6);
  EXPECT_NEAR(std::stod(line_after(r.out, "bound t_cut <= ")), 2 * std::numbers::pi, 1e-6);
  EXPECT_NE(r.out.find("condition abelian-complement"), std::string::npos);
}

TEST(Cli, IntegrabilityEngTwo) {
  auto r = run({"analyze", "eng", "2", "--integrability"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("integrability eng(2): certified"), std::string::npos);
  std::istringstream is(r.out);
  std::size_t brackets = 0;
  for (std::string line; std::getline(is, line);)
    if (line.rfind("  {", 0) == 0) {
      ++brackets;
      EXPECT_TRUE(line.size() > 4 && line.substr(line.size() - 4) == " = 0") << line;
    }
  EXPECT_EQ(brackets, 15u);  // 6 functions
}

TEST(Cli, JsonReportsAreDeterministic) {
  for (std::vector<std::string> args :
       {std::vector<std::string>{"analyze", "n6_2_5a", "--integrability", "--seed", "3", "--format", "json"},
        std::vector<std::string>{"cut-time", "eng", "1", "--mu", "1/2,0,1", "--p0", "1/2", "--T", "30", "--format", "json"},
        std::vector<std::string>{"reduce", "f24", "--format", "json", "--emit-connection"}}) {
    auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    auto j = nlohmann::json::parse(a.out);
    EXPECT_EQ(j["schema"], 1);
  }
}

TEST(Cli, WritesTrajectoryAndPlotFiles) {
  auto dir = std::filesystem::temp_directory_path() / "carnot_cli_test";
  std::filesystem::create_directories(dir);
  auto csv = (dir / "traj.csv").string(), prefix = (dir / "plot").string();
  auto r = run({"integrate", "heisenberg", "--mu", "0,1", "--p0", "1", "--T", "1", "--step", "0.01", "--out", csv,
                "--plot", prefix});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(csv);
  std::string header, first;
  std::getline(f, header);
  std::getline(f, first);
  EXPECT_EQ(header, "t,p_x1,x1,H");
  EXPECT_EQ(first, "0,1,0,0.5");
  EXPECT_TRUE(std::filesystem::exists(prefix + ".trajectory.dat"));
  EXPECT_TRUE(std::filesystem::exists(prefix + ".potential.dat"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, SpecFileAsGroupSource) {
  auto path = (std::filesystem::temp_directory_path() / "carnot_cli_heisenberg.group").string();
  auto r = run({"catalog", "export", "heisenberg", "--out", path});
  ASSERT_EQ(r.code, 0);
  auto from_file = run({"reduce", path, "--mu", "1,2"});
  auto from_catalog = run({"reduce", "heisenberg", "--mu", "1,2"});
  EXPECT_EQ(line_after(from_file.out, "H_mu = "), line_after(from_catalog.out, "H_mu = "));
  std::filesystem::remove(path);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"reduce"}).code, 2);
  EXPECT_EQ(run({"reduce", "f23", "--mu", "1,1"}).code, 2);
  EXPECT_EQ(run({"reduce", "f23", "--mu", "1,x,1"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"reduce", "nope"}).code, 3);
  EXPECT_EQ(run({"reduce", "eng", "0"}).code, 3);
  EXPECT_EQ(run({"analyze", "f23", "--metric-line", "--mu", "1,1,1", "--p0", "1,0"}).code, 3);
  EXPECT_EQ(run({"integrate", "eng", "1", "--mu", "0,0,1", "--p0", "1", "--T", "100", "--step", "0.5", "--strict"}).code, 4);
  EXPECT_EQ(run({"integrate", "eng", "1", "--mu", "0,0,1", "--p0", "1", "--T", "100", "--step", "0.5"}).code, 0);
  EXPECT_EQ(run({"analyze", "heisenberg", "--metric-line", "--mu", "0,0", "--p0", "1", "--T", "5", "--strict"}).code, 5);
  EXPECT_EQ(run({"analyze", "f24", "--integrability", "--strict", "--samples", "10"}).code, 5);
}

TEST(Cli, MetricLineOnEngOne) {
  auto r = run({"analyze", "eng", "1", "--metric-line", "--mu", "0,0,1", "--p0", "1", "--T", "40"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("metric-line eng(1): excluded-by-1"), std::string::npos);
}

#ifdef CARNOT_SHARE_DIR
TEST(GroupSpec, ShippedSampleFilesParse) {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(std::string(CARNOT_SHARE_DIR) + "/groups")) {
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    group_spec g;
    ASSERT_NO_THROW(g = parse_group_spec(ss.str())) << entry.path();
    EXPECT_TRUE(verify_frame_brackets(g.algebra, make_group_model(g.algebra, g.split).frame).passed);
    ++count;
  }
  EXPECT_GE(count, 5u);
  std::ifstream in(std::string(CARNOT_SHARE_DIR) + "/groups/f24.group");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(parse_group_spec(ss.str()).algebra, catalog::f24().model.algebra);
}
#endif
