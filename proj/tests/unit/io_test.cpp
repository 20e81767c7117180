#include "hessflow/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hessflow/problems.hpp"

namespace hessflow::io {
namespace {

namespace fs = std::filesystem;

const char* kTorus = R"(
[run]
seed = 7

[operator]
family = sigma_root
n = 2
k = 2

[grid]
topology = periodic
shape = [16, 16]
length = [2pi, 2pi]

[problem]
chi = 2
psi = constant(1.0)
phi_b = sum(0.5, cos_product(0.1, [1, 1], 0))
horizon = 0.2

[step]
dt = 0.05
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return text.replace(at, from.size(), to);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hessflow_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.line();
  }
  ADD_FAILURE() << "expected ConfigError";
  return -1;
}

TEST(ParseConfig, MinimalTorusIsValid) {
  const auto cfg = parse_config(kTorus);
  ASSERT_TRUE(cfg.op && cfg.problem);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.problem->grid.size(), 256u);
  EXPECT_NEAR(cfg.problem->grid.spacing[0], 2 * std::numbers::pi / 16, 1e-15);
  EXPECT_EQ(cfg.problem->step.kind, StepKind::Implicit);
  EXPECT_EQ(parse_config(kTorus, 99).seed, 99u);
  const auto flat = parse_config(
      replace(kTorus, "sum(0.5, cos_product(0.1, [1, 1], 0))", "quadratic(0.5, [0, 0])"));
  EXPECT_EQ(flat.problem->phi_b[17], 0.5);
}

TEST(ParseConfig, KAboveNIsRejectedWithLine) {
  const int line = line_of([] { parse_config(replace(kTorus, "k = 2", "k = 3")); });
  EXPECT_EQ(line, 8);
}

TEST(ParseConfig, InadmissiblePhiBNamesTheNode) {
  try {
    parse_config(replace(kTorus, "sum(0.5, cos_product(0.1, [1, 1], 0))", "cos_product(-3, [1, 0], 0)"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 18);
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, UnknownAndMissingKeys) {
  EXPECT_EQ(line_of([] { parse_config(replace(kTorus, "dt = 0.05", "dt = 0.05\ndtt = 1")); }), 23);
  EXPECT_EQ(line_of([] { parse_config(replace(kTorus, "horizon = 0.2", "")); }), 15);
  EXPECT_EQ(line_of([] { parse_config(std::string(kTorus) + "\n[bogus]\n"); }), 24);
  EXPECT_THROW(parse_config(replace(kTorus, "shape = [16, 16]", "shape = [16]")), ConfigError);
  EXPECT_THROW(parse_config(replace(kTorus, "chi = 2", "chi = diag(1)")), ConfigError);
}

TEST(ParseConfig, BoxNeedsBoundaryData) {
  std::string box = replace(kTorus, "periodic", "box");
  box = replace(box, "[2pi, 2pi]", "[1, 1]");
  box = replace(box, "chi = 2", "chi = 1");
  box = replace(box, "psi = constant(1.0)", "psi = 2");
  box = replace(box, "phi_b = sum(0.5, cos_product(0.1, [1, 1], 0))",
                "phi_b = quadratic(0, [0.25, 0.25])");
  EXPECT_THROW(parse_config(box), ConfigError);
  const auto cfg = parse_config(replace(box, "horizon", "phi_s = quadratic(0, [0.25, 0.25])\nhorizon"));
  EXPECT_EQ(cfg.problem->grid.topology, Topology::DirichletBox);
}

TEST(ParseExpression, CatalogMatchesBuilders) {
  const Point x{0.3, -0.7, 0.0};
  EXPECT_DOUBLE_EQ(parse_expression("2.5")->value(x, 0), 2.5);
  EXPECT_DOUBLE_EQ(parse_expression("sin_product(0.1, [1, 1], -1)")->value(x, 0.5),
                   expr::sin_product(0.1, {1, 1}, -1)->value(x, 0.5));
  EXPECT_DOUBLE_EQ(parse_expression("sum(affine(1, [2, 0]), gaussian(1, 0.5, [0, 0]))")->value(x, 0),
                   1 + 2 * 0.3 + expr::gaussian(1, 0.5, {0, 0})->value(x, 0));
  EXPECT_DOUBLE_EQ(parse_expression("random_modes(3, 0.1, 2)", 5)->value(x, 0),
                   parse_expression("random_modes(3, 0.1, 2)", 5)->value(x, 0));
  EXPECT_THROW(parse_expression("sin_product(0.1, [1, 1]"), InvalidConfiguration);
  EXPECT_THROW(parse_expression("nope(1)"), InvalidConfiguration);
}

TEST(Snapshot, RoundTripIsBitExact) {
  const auto g = Grid::box({5, 6, 4}, {1.0, 2.0, 0.5});
  ScalarField f(g, 0.0, 0.125);
  Rng rng(3);
  for (double& v : f.values) v = rng.uniform(-1e3, 1e3);
  f.values[0] = std::numeric_limits<double>::denorm_min();
  f.values[1] = -0.0;
  const auto bytes = encode_snapshot(f);
  EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 3 * 4 + 3 * 8 + 4 + 8 + 8 * g.size());
  const auto back = decode_snapshot(bytes);
  EXPECT_EQ(encode_snapshot(back), bytes);
  EXPECT_EQ(back.time, 0.125);
  EXPECT_EQ(back.grid.topology, Topology::DirichletBox);
  EXPECT_EQ(std::memcmp(back.values.data(), f.values.data(), 8 * g.size()), 0);
  EXPECT_THROW(decode_snapshot(bytes.substr(0, bytes.size() - 1)), std::runtime_error);
  EXPECT_THROW(decode_snapshot("XXXX" + bytes.substr(4)), std::runtime_error);
}

TEST(Csv, FormatAndParse) {
  std::vector<MonitorRow> rows(2);
  rows[0].t = 0.1;
  rows[0].sup_u = 1.0 / 3.0;
  rows[1].t = 0.2;
  rows[1].w = 2.5;
  const auto text = format_monitor_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kMonitorHeader);
  const auto t = parse_csv(text);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(*t.rows[0][1], 1.0 / 3.0);
  EXPECT_FALSE(t.rows[0][5].has_value());
  EXPECT_EQ(*t.rows[1][5], 2.5);
  EXPECT_FALSE(t.rows[1][6].has_value());
}

TEST(Report, ThreeRowsGiveThreePointsPerSeries) {
  const auto t = parse_csv("t,a,b\n0,1,2\n1,2,3\n2,4,1\n");
  const auto svg = render_svg_report(t);
  EXPECT_EQ(svg.find("<svg"), 0u);
  std::size_t circles = 0;
  for (auto at = svg.find("<circle"); at != std::string::npos; at = svg.find("<circle", at + 1))
    ++circles;
  EXPECT_EQ(circles, 6u);
  EXPECT_NE(svg.find("data-name=\"a\" data-points=\"3\""), std::string::npos);
  EXPECT_NE(svg.find("data-name=\"b\" data-points=\"3\""), std::string::npos);
}

TEST(Commands, SolveWithZeroHorizon) {
  const auto dir = scratch("zero");
  std::ostringstream out, err;
  const Command cmd{"solve", "", std::nullopt, dir.string(), true};
  EXPECT_EQ(run_command_text(cmd, replace(kTorus, "horizon = 0.2", "horizon = 0"), out, err), 0)
      << err.str();
  EXPECT_EQ(slurp(dir / "monitor.csv"), std::string(kMonitorHeader) + "\n");
  int snaps = 0;
  for (const auto& e : fs::directory_iterator(dir)) snaps += e.path().extension() == ".hfld";
  EXPECT_EQ(snaps, 1);
  const auto f = read_snapshot((dir / "snapshot_000000.hfld").string());
  EXPECT_EQ(f.time, 0.0);
}

TEST(Commands, SolveIsDeterministic) {
  const std::string text = replace(kTorus, "psi = constant(1.0)", "psi = random_modes(4, 0.05, 2)");
  std::string csv[2], snap[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = scratch("det" + std::to_string(i));
    std::ostringstream out, err;
    ASSERT_EQ(run_command_text({"solve", "", 11, dir.string(), true}, text, out, err), 0) << err.str();
    csv[i] = slurp(dir / "monitor.csv");
    snap[i] = slurp(dir / "snapshot_000004.hfld");
  }
  EXPECT_EQ(std::count(csv[0].begin(), csv[0].end(), '\n'), 5);
  EXPECT_FALSE(snap[0].empty());
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(snap[0], snap[1]);
}

TEST(Commands, CheckOperatorOnSigma2) {
  std::ostringstream out, err;
  const std::string text = "[operator]\nfamily = sigma_root\nn = 3\nk = 2\n[structure]\nbudget = 2000\n";
  EXPECT_EQ(run_command_text({"check-operator", "", std::nullopt, ".", false}, text, out, err), 0)
      << err.str() << out.str();
  EXPECT_NE(out.str().find("K1 = 0\n"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("all conditions hold"), std::string::npos);
}

TEST(Commands, ExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(run_command_text({"solve", "", {}, ".", true}, replace(kTorus, "k = 2", "k = 5"), out, err),
            kValidationError);
  EXPECT_NE(err.str().find("line 8"), std::string::npos) << err.str();
  EXPECT_EQ(run_command_text({"launch", "", {}, ".", true}, kTorus, out, err), kValidationError);
  EXPECT_EQ(run_command({"solve", "/nonexistent.ini", {}, ".", true}, out, err), kValidationError);

  const std::string steady_long =
      replace(kTorus, "[step]", "[steady]\nmax_steps = 2\ntol = 1e-14\n[step]");
  const auto dir = scratch("timeout");
  EXPECT_EQ(run_command_text({"steady", "", {}, dir.string(), true}, steady_long, out, err),
            kRunFailure);

  const std::string bad_sub = std::string(kTorus) + "[subsolution]\nexpression = sum(5, cos_product(0.1, [1, 1], 0))\n";
  EXPECT_EQ(run_command_text({"verify-subsolution", "", {}, ".", true}, bad_sub, out, err),
            kCertificationViolation);
  const std::string good_sub = std::string(kTorus) + "[subsolution]\nsafety = 0.1\ndelta = 0.05\n";
  EXPECT_EQ(run_command_text({"verify-subsolution", "", {}, ".", true}, good_sub, out, err), kSuccess)
      << err.str();
}

TEST(Commands, SteadyWritesRowsAndReport) {
  const auto dir = scratch("steady");
  const std::string text = replace(kTorus, "psi = constant(1.0)",
                                   "psi = manufactured_discrete(sin_product(0.1, [1, 0], 0))");
  std::ostringstream out, err;
  ASSERT_EQ(run_command_text({"steady", "", {}, dir.string(), true}, text, out, err), 0) << err.str();
  const auto table = parse_csv(slurp(dir / "monitor.csv"));
  ASSERT_GE(table.rows.size(), 2u);
  EXPECT_LT(*table.rows.back()[4], 1e-8);
  ASSERT_EQ(run_command({"report", "", {}, dir.string(), true}, out, err), 0) << err.str();
  EXPECT_TRUE(fs::exists(dir / "report.svg"));
}

}  // namespace
}  // namespace hessflow::io
