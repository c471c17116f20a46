#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "test_common.hpp"

using namespace lineopt;
namespace fs = std::filesystem;

namespace {

const ProblemCatalog& catalog() {
  static const ProblemCatalog c = default_catalog();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LINEOPT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::path(testing::TempDir()) / ("lineopt_bench_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small grid: the 343-state space, pggray only.
ExperimentGrid tiny_grid(std::size_t runs) {
  ExperimentGrid g;
  g.margins = {0.015};
  g.dev_modes = {DevMode::no_dev};
  g.schemes = {Scheme::pggray};
  g.runs = runs;
  return g;
}

const GridResult& tiny_result() {
  static CostCache cache(catalog());
  static const GridResult r = run_grid(tiny_grid(50), cache);
  return r;
}

}  // namespace

TEST(BruteForce, SingleStateSpace) {
  const ThreeBodySpace space(testing_util::cut_reduced(reduce_space(catalog(), 0.02, DevMode::no_dev), {1, 1, 1}));
  const auto r = brute_force(catalog(), space);
  EXPECT_EQ(r.evaluated, 1u);
  EXPECT_EQ(r.genome, (Genome{0, 0, 0}));
  EXPECT_EQ(r.config, space.decode({0, 0, 0}));
}

TEST(BruteForce, ToyMinimumMatchesIndependentEvaluation) {
  const ThreeBodySpace space(testing_util::toy_reduced(catalog()));
  const auto r = brute_force(catalog(), space);
  EXPECT_EQ(r.evaluated, 384u);
  EXPECT_EQ(evaluate(catalog(), r.config).total, r.cost.total);
  for (std::uint64_t i = 0; i < space.total_size(); ++i) {
    const double c = evaluate(catalog(), space.decode(space.from_flat(i))).total;
    ASSERT_GE(c, r.cost.total);
    if (i < space.flat_index(r.genome)) ASSERT_GT(c, r.cost.total);
  }
}

TEST(BruteForce, TiesGoToLowestIndexAndCapIsEnforced) {
  const ThreeBodySpace space(testing_util::toy_reduced(catalog()));
  const auto r = brute_force(space, [](const LineConfig&) { return CostValue{}; });
  EXPECT_EQ(r.genome, (Genome{0, 0, 0}));
  EXPECT_THROW(brute_force(catalog(), space, 100), SpaceTooLargeError);
  const TwelveBodySpace big(catalog(), DevMode::yes_dev);
  EXPECT_THROW(brute_force(catalog(), big), SpaceTooLargeError);
}

TEST(BruteForce, SubsetMinimumIsNotLower) {
  CostCache cache(catalog());
  auto eval = [&](const LineConfig& c) {
    CostValue v;
    v.total = cache(c);
    return v;
  };
  const double small = brute_force(ThreeBodySpace(reduce_space(catalog(), 0.015, DevMode::no_dev)), eval).cost.total;
  const double large = brute_force(ThreeBodySpace(reduce_space(catalog(), 0.02, DevMode::no_dev)), eval).cost.total;
  EXPECT_GE(small, large);
}

TEST(SignTest, Values) {
  EXPECT_DOUBLE_EQ(sign_test(0, 0), 1.0);
  EXPECT_NEAR(sign_test(5, 0), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(sign_test(3, 3), 42.0 / 64.0, 1e-12);
  EXPECT_NEAR(sign_test(9, 1), 11.0 / 1024.0, 1e-12);
  EXPECT_LT(sign_test(40, 10), 1e-4);
}

TEST(Classify, ExactComparison) {
  EXPECT_EQ(classify(0.0), Outcome::tie);
  EXPECT_EQ(classify(1e-12), Outcome::improved);
  EXPECT_EQ(classify(-1e-12), Outcome::worse);
}

TEST(GridText, ParsesKeysAndReportsErrors) {
  const auto g = parse_grid(
      "# desk grid\n"
      "margins = 0.015, 0.05\n"
      "dev_modes = yesDev\n"
      "schemes = pggray, basic\n"
      "solvers = ga1, sa\n"
      "runs = 7\n"
      "chi = 4\n"
      "chi_list = 2, 6\n"
      "selection = random\n"
      "warm_start = true\n"
      "master_seed = 11\n");
  EXPECT_EQ(g.margins, (std::vector<double>{0.015, 0.05}));
  EXPECT_EQ(g.dev_modes, (std::vector<DevMode>{DevMode::yes_dev}));
  EXPECT_EQ(g.schemes.size(), 2u);
  EXPECT_EQ(g.solvers, (std::vector<SolverKind>{SolverKind::ga1, SolverKind::sa}));
  EXPECT_EQ(g.runs, 7u);
  EXPECT_EQ(g.geo.train.max_bond, 4u);
  EXPECT_EQ(g.chi_list, (std::vector<std::size_t>{2, 6}));
  EXPECT_EQ(g.geo.selection, Selection::random);
  EXPECT_TRUE(g.geo.warm_start);
  EXPECT_EQ(g.master_seed, 11u);
  try {
    parse_grid("runs = 3\nsolvers = ga1, ga9\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("solvers"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_grid("runs = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_grid("colour = blue\n"), std::invalid_argument);
}

TEST(RunSeed, DependsOnEveryCoordinate) {
  const auto base = run_seed(1, 0.05, DevMode::yes_dev, Parameterization::three_body, SolverKind::sa, 3);
  EXPECT_EQ(base, run_seed(1, 0.05, DevMode::yes_dev, Parameterization::three_body, SolverKind::sa, 3));
  EXPECT_NE(base, run_seed(2, 0.05, DevMode::yes_dev, Parameterization::three_body, SolverKind::sa, 3));
  EXPECT_NE(base, run_seed(1, 0.02, DevMode::yes_dev, Parameterization::three_body, SolverKind::sa, 3));
  EXPECT_NE(base, run_seed(1, 0.05, DevMode::no_dev, Parameterization::three_body, SolverKind::sa, 3));
  EXPECT_NE(base, run_seed(1, 0.05, DevMode::yes_dev, Parameterization::twelve_body, SolverKind::sa, 3));
  EXPECT_NE(base, run_seed(1, 0.05, DevMode::yes_dev, Parameterization::three_body, SolverKind::pt, 3));
  EXPECT_NE(base, run_seed(1, 0.05, DevMode::yes_dev, Parameterization::three_body, SolverKind::sa, 4));
}

TEST(Grid, CountsTracesAndPairsPrefixes) {
  const auto& r = tiny_result();
  EXPECT_EQ(r.cells.size(), 5u);
  EXPECT_EQ(r.conventional_traces.size(), 250u);
  EXPECT_EQ(r.boosted_traces.size(), 250u);
  for (std::size_t i = 0; i < 250; ++i) {
    const auto& conv = r.conventional_traces[i];
    const auto& geo = r.boosted_traces[i];
    EXPECT_EQ(geo.solver_id, "geo-pggray-" + conv.solver_id);
    const std::size_t n = std::min<std::size_t>(100, conv.entries.size());
    for (std::size_t k = 0; k < n; ++k) ASSERT_EQ(geo.entries[k].genome, conv.entries[k].genome);
  }
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.conventional.size(), 50u);
    EXPECT_EQ(c.boosted.size(), 50u);
    EXPECT_EQ(c.space_size, 343u);
  }
}

TEST(Grid, TinySpaceCellsAllTieAtOptimum) {
  const auto& r = tiny_result();
  const double opt = r.oracle.at("3body:1.5%-noDev");
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.best_conventional(), opt) << to_string(c.solver);
    EXPECT_EQ(c.best_boosted(), opt) << to_string(c.solver);
    EXPECT_EQ(c.delta(), 0.0);
  }
}

TEST(Grid, InfeasibleMarginIsSkipped) {
  auto cat = catalog();
  cat.monthly_targets.fill(1e7);  // no stage can reach this
  ExperimentGrid g = tiny_grid(1);
  g.solvers = {SolverKind::sa};
  CostCache cache(cat);
  const auto r = run_grid(g, cache);
  EXPECT_TRUE(r.cells.empty());
  ASSERT_EQ(r.skipped.size(), 1u);
}

TEST(Heatmap, CountsAndMarkersAreConsistent) {
  GridResult r;
  auto cell = [](const std::string& space, SolverKind s, std::vector<double> conv, std::vector<double> geo) {
    CellResult c;
    c.space = space;
    c.solver = s;
    c.conventional = std::move(conv);
    c.boosted = std::move(geo);
    return c;
  };
  r.cells = {cell("A", SolverKind::ga1, {5, 3}, {2, 4}), cell("A", SolverKind::sa, {2, 9}, {7, 2}),
             cell("A", SolverKind::pt, {9, 8}, {8, 9}), cell("B", SolverKind::ga1, {1}, {1}),
             cell("B", SolverKind::sa, {4}, {6})};
  const auto maps = heatmap(r);
  ASSERT_EQ(maps.size(), 1u);
  const auto& m = maps[0];
  EXPECT_EQ(m.improved + m.ties + m.worse, r.cells.size());
  EXPECT_EQ(m.improved, 1u);  // ga1 in A: 3 -> 2
  EXPECT_EQ(m.ties, 3u);
  EXPECT_EQ(m.worse, 1u);
  // A: minimum 2 reached by ga1 geo, sa conv and sa geo; maximum 8 by pt both
  EXPECT_EQ(m.cells[0].best_marker, "geo");
  EXPECT_EQ(m.cells[1].best_marker, "both");
  EXPECT_EQ(m.cells[2].worst_marker, "both");
  EXPECT_EQ(m.cells[2].best_marker, "");
  EXPECT_EQ(m.cells[4].worst_marker, "geo");
  EXPECT_EQ(m.cells[3].best_marker, "both");

  const auto rel = relative_tables(r);
  EXPECT_EQ(rel.conventional.size(), 5u);
  for (const auto& e : rel.conventional) EXPECT_GE(e.value, 0.0);
  for (const auto& e : rel.boosted) EXPECT_GE(e.value, 0.0);
  EXPECT_EQ(rel.conventional[1].value, 0.0);
  EXPECT_EQ(rel.conventional[2].value, 6.0);
  EXPECT_EQ(rel.boosted[4].value, 5.0);
}

TEST(Heatmap, AllZeroDeltaAllTies) {
  const auto maps = heatmap(tiny_result());
  ASSERT_EQ(maps.size(), 1u);
  EXPECT_EQ(maps[0].ties, 5u);
  for (const auto& c : maps[0].cells) EXPECT_EQ(c.best_marker, "both");
}

TEST(RelativeTables, BestSolverIsZeroAndSingleSolverIsAllZero) {
  const auto& r = tiny_result();
  const auto rel = relative_tables(r);
  for (const auto& e : rel.conventional) EXPECT_EQ(e.value, 0.0);
  GridResult one;
  one.cells = {r.cells[0]};
  for (const auto& e : relative_tables(one).boosted) EXPECT_EQ(e.value, 0.0);
}

TEST(Convergence, SingleRunCurveIsItsTrace) {
  const auto& t = tiny_result().conventional_traces[0];
  const auto curves = convergence_curves({t}, 240, {});
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].baseline_kind, "best-observed");
  EXPECT_EQ(curves[0].mean.size(), 240u);
  for (std::size_t i = 0; i < 240; ++i) EXPECT_EQ(curves[0].mean[i], t.best_at(i + 1) - t.best());
}

TEST(Convergence, CurvesNonIncreasingWithOracleBaseline) {
  const auto& r = tiny_result();
  const auto curves = convergence_curves(r.conventional_traces, 240, r.oracle);
  EXPECT_EQ(curves.size(), 5u);
  for (const auto& c : curves) {
    EXPECT_EQ(c.baseline_kind, "brute-force");
    EXPECT_EQ(c.runs, 50u);
    for (std::size_t i = 1; i < c.mean.size(); ++i) EXPECT_LE(c.mean[i], c.mean[i - 1]);
    EXPECT_GE(c.mean.back(), 0.0);
  }
}

TEST(Outputs, SummaryRecomputesFromTraceFiles) {
  const auto dir = scratch("outputs");
  const auto& r = tiny_result();
  const std::vector<BondRow> sweep{{6, 1, 5, 5}};
  write_outputs(dir, tiny_grid(50), r, &sweep);
  for (const char* f : {"summary.json", "heatmap_pggray.csv", "relative_conv.csv", "relative_geo.csv", "bond_sweep.csv",
                        "convergence_3body.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto first_line = [](const std::string& text) { return text.substr(0, text.find('\n')); };
  EXPECT_EQ(first_line(slurp(dir / "heatmap_pggray.csv")),
            "space,solver,conventional,boosted,delta,outcome,best_marker,worst_marker");
  EXPECT_EQ(first_line(slurp(dir / "bond_sweep.csv")),
            "chi,improved,improved_or_tied,total,pct_improved,pct_improved_or_tied");

  std::map<std::pair<std::string, std::string>, double> best;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "traces")) {
    std::ifstream in(entry.path());
    const auto t = read_trace_csv(in);
    const std::string name = entry.path().filename().string();
    const std::string kind = name.substr(0, 4) == "conv" ? "conv" : "geo";
    std::smatch m;
    ASSERT_TRUE(std::regex_search(name, m, std::regex("[_-](ga1|ga2|gau|sa|pt)\\.csv$"))) << name;
    auto& b = best.try_emplace({kind, m[1]}, INFINITY).first->second;
    b = std::min(b, t.best());
    ++files;
  }
  EXPECT_EQ(files, 500u);
  const auto doc = nlohmann::json::parse(slurp(dir / "summary.json"));
  ASSERT_EQ(doc.at("cells").size(), 5u);
  for (const auto& c : doc.at("cells")) {
    const std::string solver = c.at("solver");
    EXPECT_EQ(c.at("best_conventional").get<double>(), best.at({"conv", solver}));
    EXPECT_EQ(c.at("best_boosted").get<double>(), best.at({"geo", solver}));
    EXPECT_EQ(c.at("delta").get<double>(), best.at({"conv", solver}) - best.at({"geo", solver}));
  }
}

TEST(Outputs, GridRerunIsBitIdentical) {
  ExperimentGrid g = tiny_grid(3);
  g.margins = {0.05};
  g.dev_modes = {DevMode::yes_dev};
  g.solvers = {SolverKind::ga2, SolverKind::pt};
  CostCache a(catalog()), b(catalog());
  const auto ra = run_grid(g, a);
  const auto rb = run_grid(g, b);
  EXPECT_EQ(summary_json(g, ra).dump(), summary_json(g, rb).dump());
  ASSERT_EQ(ra.boosted_traces.size(), rb.boosted_traces.size());
  for (std::size_t i = 0; i < ra.boosted_traces.size(); ++i) {
    EXPECT_EQ(trace_csv(ra.boosted_traces[i]), trace_csv(rb.boosted_traces[i]));
  }
}

TEST(BondSweep, OneChiOneRow) {
  ExperimentGrid g = tiny_grid(2);
  g.solvers = {SolverKind::ga1, SolverKind::sa};
  g.chi_list = {3};
  CostCache cache(catalog());
  const auto rows = bond_sweep(g, cache);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].chi, 3u);
  EXPECT_EQ(rows[0].total, 2u);
  EXPECT_LE(rows[0].improved, rows[0].improved_or_tied);
  EXPECT_LE(rows[0].improved_or_tied, rows[0].total);
}

TEST(Formulations, PairedComparisonShape) {
  CostCache cache(catalog());
  const ThreeBodySpace three(reduce_space(catalog(), 0.05, DevMode::yes_dev));
  const TwelveBodySpace twelve(catalog(), DevMode::yes_dev);
  const auto rows = compare_formulations(three, twelve, 4, 240, 5, cache);
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    EXPECT_LE(r.wins + r.losses, 4u);
    EXPECT_DOUBLE_EQ(r.p_value, sign_test(r.wins, r.losses));
  }
}

TEST(Cli, SolveTraceIsByteIdenticalAcrossRuns) {
  const auto dir = scratch("cli_solve");
  for (const char* solver : {"ga1", "pt"}) {
    const auto a = dir / (std::string(solver) + "_a.csv");
    const auto b = dir / (std::string(solver) + "_b.csv");
    const std::string args = std::string("solve --margin 0.05 --dev yes --solver ") + solver + " --seed 77 --trace ";
    ASSERT_EQ(run_cli(args + a.string()), 0);
    ASSERT_EQ(run_cli(args + b.string()), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
  }
}

TEST(Cli, MpsDumpLoadRoundTripIsBitExact) {
  const auto dir = scratch("cli_mps");
  ASSERT_EQ(run_cli("mps init --sites 12 --chi 5 --seed 3 --out " + (dir / "m.txt").string()), 0);
  ASSERT_EQ(run_cli("mps dump --in " + (dir / "m.txt").string() + " --out " + (dir / "m2.txt").string()), 0);
  EXPECT_EQ(slurp(dir / "m.txt"), slurp(dir / "m2.txt"));
  EXPECT_EQ(run_cli("mps load --in " + (dir / "m2.txt").string()), 0);
  Rng rng(3);
  std::ifstream in(dir / "m.txt");
  EXPECT_EQ(MpsModel::read(in), MpsModel::random(12, 5, rng));
}

TEST(Cli, DecodeSignalsInvalidAndErrorsExitNonZero) {
  EXPECT_EQ(run_cli("decode --margin 0.015 --dev no --scheme basic --bits 111111111"), 3);
  EXPECT_EQ(run_cli("decode --margin 0.015 --dev no --scheme basic --bits 000000000"), 0);
  EXPECT_EQ(run_cli("solve --solver nope"), 2);
}

TEST(Cli, PgChainFlagSelectsChainedOrdering) {
  const auto dir = scratch("chain");
  const ThreeBodySpace space(reduce_space(catalog(), 0.05, DevMode::no_dev));
  const Genome g{3, 20, 1};
  const PgGrayEncoding plain(space), chained(space, true);
  ASSERT_NE(to_string(plain.encode(g)), to_string(chained.encode(g)));
  for (bool chain : {false, true}) {
    const auto out = dir / (chain ? "chained.txt" : "plain.txt");
    const std::string cmd = std::string(LINEOPT_CLI) + " encode --margin 0.05 --dev no --genome 3,20,1" +
                            (chain ? " --pg-chain" : "") + " > " + out.string();
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, to_string((chain ? chained : plain).encode(g)));
  }
}
