#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <bmlab/cli.hpp>

using namespace bmlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("bmlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

struct Run {
  int code;
  std::string log, err;
};

Run run(const std::string& cmd, const fs::path& cfg, const fs::path& out, int jobs = 1,
        const std::string& check = "") {
  cli::Options o;
  o.command = cmd;
  o.check_name = check;
  o.config = cfg.string();
  o.out = out.string();
  o.jobs = jobs;
  std::ostringstream log, err;
  int c = cli::execute(o, log, err);
  return {c, log.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

const char* dim_bm_check_cfg = R"({
  "command": "check", "check": "dim_bm",
  "instance": {"k": {"type": "interval", "a": 1.0}, "l": {"type": "interval", "a": 2.0}, "lambda": 0.5,
               "phi": {"type": "constant", "n": 1, "c": 1.0}, "beta": 1.0, "measure": {"weight": "gaussian", "n": 1}}
})";

}  // namespace

// --- instance generation

TEST(Search, InstancesAreDeterministic) {
  for (const std::string t : {"dim_bm", "bbl", "hereditary", "torsion_bm", "b_local"}) {
    InstanceSpec s;
    s.target = t;
    s.n = 2;
    s.count = 8;
    s.seed = 99;
    for (std::size_t i = 0; i < s.count; ++i) EXPECT_EQ(random_instance(s, i).dump(), random_instance(s, i).dump()) << t;
    EXPECT_NE(random_instance(s, 0).dump(), random_instance(s, 1).dump()) << t;
    InstanceSpec s2 = s;
    s2.seed = 100;
    EXPECT_NE(random_instance(s, 0).dump(), random_instance(s2, 0).dump()) << t;
  }
}

TEST(Search, InstancesStayInTheirFamilies) {
  InstanceSpec s;
  s.target = "dim_bm";
  s.n = 2;
  s.count = 30;
  s.seed = 5;
  s.measure = "gaussian";
  s.ranges["lambda"] = {0.2, 0.3};
  s.ranges["beta"] = {1.0, 1.5};
  for (std::size_t i = 0; i < s.count; ++i) {
    auto rec = random_instance(s, i);
    auto d = dim_bm_from_json(rec["instance"], "instance");
    EXPECT_EQ(d.k.dim(), 2);
    EXPECT_EQ(d.l.dim(), 2);
    EXPECT_GE(d.lambda, 0.2);
    EXPECT_LE(d.lambda, 0.3);
    EXPECT_GE(d.beta, 1.0);
    EXPECT_LE(d.beta, 1.5);
    EXPECT_EQ(d.mu.weight().name(), "gaussian");
    // cap is nonnegative on both bodies
    for (int a = 0; a < 16; ++a) {
      Vec u = make_vec({std::cos(a * pi / 8), std::sin(a * pi / 8)});
      EXPECT_GE(d.phi.value(d.k.radial(u) * u), -1e-12);
      EXPECT_GE(d.phi.value(d.l.radial(u) * u), -1e-12);
    }
  }
  EXPECT_THROW(random_instance(s, s.count), Error);
}

TEST(Search, ProductMeasuresAreHereditarilyAdmissible) {
  InstanceSpec s;
  s.target = "hereditary";
  s.n = 2;
  s.count = 12;
  s.seed = 17;
  s.measure = "product";
  auto r = search_min_margin(s);
  EXPECT_EQ(r.errors, 0u);
  EXPECT_EQ(r.escalations, 0u);
  for (const auto& e : r.entries) EXPECT_GE(e.margin, -e.tolerance) << e.index;
}

TEST(Search, ArgminReplaysExactly) {
  InstanceSpec s;
  s.target = "dim_bm";
  s.n = 2;
  s.count = 10;
  s.seed = 3;
  auto r = search_min_margin(s);
  ASSERT_EQ(r.errors, 0u);
  double lo = inf;
  for (const auto& e : r.entries) lo = std::min(lo, e.margin);
  EXPECT_EQ(r.min_margin, lo);
  EXPECT_EQ(r.entries[r.argmin_index].margin, lo);
  auto again = replay(r.argmin, {});
  EXPECT_NEAR(again.margin, r.min_margin, 1e-10);
  EXPECT_NEAR(num(r.argmin_report.at("margin")), r.min_margin, 1e-10);
}

TEST(Search, HistogramCoversEveryInstance) {
  InstanceSpec s;
  s.target = "b_local";
  s.n = 1;
  s.count = 40;
  s.seed = 11;
  auto r = search_min_margin(s);
  ASSERT_EQ(r.histogram.size(), 64u);
  std::size_t total = 0;
  for (auto c : r.histogram) total += c;
  EXPECT_EQ(total, s.count - r.errors);
  // the min lands in the first bin, the max in the last
  EXPECT_GE(r.histogram.front(), 1u);
  EXPECT_GE(r.histogram.back(), 1u);
}

TEST(Search, JobsDoNotChangeResults) {
  InstanceSpec s;
  s.target = "dim_bm";
  s.n = 2;
  s.count = 12;
  s.seed = 8;
  s.quad.mode = QuadMode::MonteCarlo;
  s.quad.mc_samples = 4000;
  auto a = to_json(search_min_margin(s, 1)).dump();
  auto b = to_json(search_min_margin(s, 3)).dump();
  EXPECT_EQ(a, b);
}

// --- report serialization

TEST(Reports, SearchReportRoundTrip) {
  InstanceSpec s;
  s.target = "bbl";
  s.n = 1;
  s.count = 6;
  s.seed = 1;
  json j = to_json(search_min_margin(s));
  EXPECT_EQ(to_json(search_report_from_json(j)).dump(), j.dump());
}

TEST(Reports, CheckReportRoundTrip) {
  CheckReport r;
  r.name = "x";
  r.margin = -0.25;
  r.tolerance = 1e-9;
  r.verdict = Verdict::Violated;
  r.theorem = false;
  r.details["a"] = std::numeric_limits<double>::quiet_NaN();
  r.details["b"] = -inf;
  r.witness = {{"k", 1}};
  EXPECT_TRUE(check_report_from_json(to_json(r)) == r);
  EXPECT_EQ(to_json(check_report_from_json(to_json(r))).dump(), to_json(r).dump());
}

TEST(Reports, SecondVariationReportRoundTrip) {
  cli::SecondVariationReport r;
  r.t0 = 0.1;
  r.sv.value = -1.5;
  r.sv.literal_value = -1.25;
  r.sv.phi = 2;
  r.sv.phi_dd = -0.5;
  r.sv.A = 1;
  r.sv.B = 2;
  r.sv.C = 3;
  r.sv.terms["boundary"] = 0.75;
  r.fd_step = 1e-2;
  r.fd_d2 = -0.49;
  r.fd_gap = 0.01;
  r.problem = {{"family", {{"type", "disc"}}}};
  json j = cli::to_json(r);
  EXPECT_EQ(cli::to_json(cli::second_variation_report_from_json(j)).dump(), j.dump());
}

TEST(Reports, EscalationMapping) {
  CheckReport r;
  r.name = "dim_bm";
  r.margin = -1;
  r.tolerance = 0.5;
  r.theorem = true;
  EXPECT_TRUE(escalates(r));
  r.theorem = false;
  EXPECT_FALSE(escalates(r));
  r.theorem = true;
  r.margin = -0.4;
  EXPECT_FALSE(escalates(r));
  r.name = "lift";
  r.margin = -1;
  r.verdict = Verdict::Inconclusive;
  EXPECT_FALSE(escalates(r));
  r.verdict = Verdict::Violated;
  EXPECT_TRUE(escalates(r));
}

// --- CLI

TEST(Cli, CheckWritesJsonAndCsv) {
  auto dir = scratch("check");
  auto res = run("check", write_config(dir, dim_bm_check_cfg), dir / "out", 1, "dim_bm");
  ASSERT_EQ(res.code, 0) << res.err;
  auto rows = csv_rows(slurp(dir / "out" / "check_dim_bm.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"name", "margin", "tolerance", "verdict", "theorem"}));
  EXPECT_NEAR(std::stod(rows[1][1]), 0.0292, 5e-5);
  EXPECT_EQ(rows[1][3], "holds");
  auto j = json::parse(slurp(dir / "out" / "check_dim_bm.json"));
  EXPECT_EQ(std::stod(rows[1][1]), num(j["margin"]));
}

TEST(Cli, CheckNameMustMatchConfig) {
  auto dir = scratch("check_name");
  EXPECT_EQ(run("check", write_config(dir, dim_bm_check_cfg), dir, 1, "bbl").code, 2);
}

TEST(Cli, ConstantFamilyProfileHasZeroSecondDifferences) {
  auto dir = scratch("profile");
  auto cfg = write_config(dir, R"({
    "command": "marginal-profile",
    "problem": {
      "family": {"type": "minkowski", "k": {"type": "box", "a": [1.0, 0.6]}, "l": {"type": "box", "a": [1.0, 0.6]}},
      "phi": {"type": "frozen", "phi": {"type": "isotropic", "n": 2, "c": 1.5, "b": 0.3}},
      "measure": {"weight": "gaussian", "n": 2}, "beta": 2.0},
    "grid": {"lo": 0.0, "hi": 1.0, "points": 11}
  })");
  auto res = run("marginal-profile", cfg, dir / "out");
  ASSERT_EQ(res.code, 0) << res.err;
  auto rows = csv_rows(slurp(dir / "out" / "marginal_profile.csv"));
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "phi", "d2", "d2_half", "in_stencil"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][4] != "1") continue;
    EXPECT_NEAR(std::stod(rows[i][2]), 0.0, 1e-9) << i;
  }
  EXPECT_TRUE(fs::exists(dir / "out" / "marginal_profile.json"));
}

TEST(Cli, ConfigErrorsExitTwo) {
  auto dir = scratch("errors");
  auto bad_beta = write_config(dir, R"({"command": "second-variation",
    "problem": {"family": {"type": "disc"}, "phi": {"type": "radial_poly", "n": 1, "c": 2.0, "a": -1.0, "b": -1.0},
                "beta": -1}, "t0": 0.0})");
  auto r = run("second-variation", bad_beta, dir / "o1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta"), std::string::npos);

  auto malformed = write_config(dir, R"({"command": "check", "check": )");
  EXPECT_EQ(run("check", malformed, dir / "o2", 1, "dim_bm").code, 2);

  auto unknown = write_config(dir, R"({"command": "torsion", "body": {"type": "interval", "a": 1.0}, "bogus": 1})");
  r = run("torsion", unknown, dir / "o3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);

  auto wrong_cmd = write_config(dir, dim_bm_check_cfg);
  EXPECT_EQ(run("torsion", wrong_cmd, dir / "o4").code, 2);

  EXPECT_EQ(run("check", dir / "missing.json", dir / "o5", 1, "dim_bm").code, 2);
}

TEST(Cli, UnwritableOutputExitsTwo) {
  auto dir = scratch("unwritable");
  auto cfg = write_config(dir, dim_bm_check_cfg);
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(run("check", cfg, dir / "blocker" / "out", 1, "dim_bm").code, 2);
}

TEST(Cli, ViolationExitsOneOnlyForTheorems) {
  auto dir = scratch("violation");
  // exploratory BBL counterexample: violated but exit 0
  auto cfg = write_config(dir, R"({"command": "check", "check": "bbl", "instance": {
      "kappa": 1.0, "lambda": 0.5, "measure": {"weight": "gaussian", "n": 1},
      "f": {"type": "indicator", "center": [0.0], "r": 1.0},
      "g": {"type": "indicator", "center": [20.0], "r": 1.0},
      "h": {"type": "indicator", "center": [10.0], "r": 1.0}}})");
  auto r = run("check", cfg, dir / "out", 1, "bbl");
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(dir / "out" / "check_bbl.json"));
  EXPECT_EQ(j["verdict"], "violated");
  EXPECT_EQ(j["theorem"], false);
}

TEST(Cli, SearchIsByteIdenticalAcrossJobs) {
  auto dir = scratch("search");
  auto cfg = write_config(dir, R"({"command": "search",
    "search": {"target": "b_local", "n": 2, "count": 12, "seed": 4}})");
  ASSERT_EQ(run("search", cfg, dir / "a", 1).code, 0);
  ASSERT_EQ(run("search", cfg, dir / "b", 4).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "search.json"), slurp(dir / "b" / "search.json"));
  EXPECT_EQ(slurp(dir / "a" / "search.csv"), slurp(dir / "b" / "search.csv"));
  EXPECT_EQ(csv_rows(slurp(dir / "a" / "search.csv")).size(), 13u);
}
