#pragma once

// Experiment harness: exhaustive oracle, paired conventional/boosted runs over
// a grid of spaces, and the derived comparison tables.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lineopt/geo.hpp"

namespace lineopt {

// --- oracle -------------------------------------------------------------------

class SpaceTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BruteForceResult {
  LineConfig config;
  Genome genome;
  CostValue cost;
  std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kBruteForceCap = 50000;

/// Evaluates every state; ties go to the lowest flat index. Throws
/// SpaceTooLargeError above `cap`.
BruteForceResult brute_force(const ProblemCatalog& catalog, const SearchSpace& space,
                             std::uint64_t cap = kBruteForceCap);
BruteForceResult brute_force(const SearchSpace& space, const CostEvaluator& evaluator,
                             std::uint64_t cap = kBruteForceCap);

/// Memoizing evaluator shared across runs on one catalog. Not thread-safe.
class CostCache {
 public:
  explicit CostCache(ProblemCatalog catalog) : catalog_(std::move(catalog)) {}

  double operator()(const LineConfig& config);
  std::size_t size() const { return memo_.size(); }
  std::size_t simulations() const { return simulations_; }
  const ProblemCatalog& catalog() const { return catalog_; }
  /// Adapter usable as an Evaluator; the cache must outlive it.
  Evaluator evaluator() {
    return [this](const LineConfig& c) { return (*this)(c); };
  }

 private:
  struct Hash {
    std::size_t operator()(const std::array<int, 2 * kShops>& k) const;
  };

  ProblemCatalog catalog_;
  std::unordered_map<std::array<int, 2 * kShops>, double, Hash> memo_;
  std::size_t simulations_ = 0;
};

// --- grid -----------------------------------------------------------------------

struct ExperimentGrid {
  std::vector<double> margins{0.015, 0.02, 0.025, 0.05, 1.0};
  std::vector<DevMode> dev_modes{DevMode::no_dev, DevMode::yes_dev};
  std::vector<Scheme> schemes{Scheme::basic, Scheme::gray, Scheme::pggray};
  std::vector<SolverKind> solvers{kAllSolvers.begin(), kAllSolvers.end()};
  std::size_t runs = 50;
  std::size_t budget = 240;
  std::size_t seed_evals = 100;
  std::vector<std::size_t> chi_list{2, 3, 4, 5, 6, 7, 8, 9, 10};
  bool bond_sweep = false;
  /// Also run the conventional solvers on the 12-body formulation.
  bool twelve_body = false;
  std::uint64_t master_seed = 2023;
  GeoParams geo{};

  /// Throws std::invalid_argument on empty axes or zero runs.
  void validate() const;
};

/// `key = value` lines, lists comma separated, `#` comments. Keys: margins,
/// dev_modes, schemes, solvers, runs, budget, seed_evals, chi, chi_list,
/// bond_sweep, twelve_body, master_seed, sweeps, learning_rate, batch_size,
/// oversample, selection, warm_start.
ExperimentGrid parse_grid(std::string_view text);
ExperimentGrid load_grid(const std::filesystem::path& path);

/// Seed of conventional run `run` of `solver` on a space; boosted runs reuse it.
std::uint64_t run_seed(std::uint64_t master, double margin, DevMode mode, Parameterization p, SolverKind solver,
                       std::size_t run);

struct CellResult {
  std::string space;  // e.g. "5%-yesDev"
  double margin = 0.0;
  DevMode dev_mode = DevMode::yes_dev;
  Scheme scheme = Scheme::pggray;
  SolverKind solver = SolverKind::ga1;
  std::uint64_t space_size = 0;
  std::vector<double> conventional;  // best cost per run
  std::vector<double> boosted;

  double best_conventional() const;
  double best_boosted() const;
  /// best_conventional - best_boosted; positive when boosting found a lower cost.
  double delta() const { return best_conventional() - best_boosted(); }
};

struct GridResult {
  std::vector<CellResult> cells;
  /// Spaces dropped from the grid, with the reason.
  std::vector<std::string> skipped;
  /// Conventional traces, 3-body and (optionally) 12-body.
  std::vector<Trace> conventional_traces;
  std::vector<Trace> boosted_traces;
  /// Brute-force optimum per trace space descriptor, where affordable.
  std::map<std::string, double> oracle;
};

struct GridOptions {
  /// Keep all traces in the result (needed for convergence curves and files).
  bool keep_traces = true;
  std::ostream* progress = nullptr;
};

GridResult run_grid(const ExperimentGrid& grid, CostCache& cache, const GridOptions& options = {});

// --- analysis -------------------------------------------------------------------

enum class Outcome { improved, tie, worse };

std::string_view to_string(Outcome outcome);
Outcome classify(double delta);

struct HeatmapCell {
  std::string space;
  SolverKind solver = SolverKind::ga1;
  double conventional = 0.0;
  double boosted = 0.0;
  double delta = 0.0;
  Outcome outcome = Outcome::tie;
  /// Among all conventional and boosted results of the space: which of this
  /// column's two attain the minimum / maximum ("", "conv", "geo", "both").
  std::string best_marker;
  std::string worst_marker;
};

struct Heatmap {
  Scheme scheme = Scheme::pggray;
  std::vector<HeatmapCell> cells;
  std::size_t improved = 0;
  std::size_t ties = 0;
  std::size_t worse = 0;
};

std::vector<Heatmap> heatmap(const GridResult& result);

struct RelativeEntry {
  std::string space;
  std::optional<Scheme> scheme;  // empty for the conventional table
  SolverKind solver = SolverKind::ga1;
  double value = 0.0;
};

struct RelativeTables {
  std::vector<RelativeEntry> conventional;
  std::vector<RelativeEntry> boosted;
};

/// Per space (and scheme), each solver's best minus the best over solvers.
RelativeTables relative_tables(const GridResult& result);

struct BondRow {
  std::size_t chi = 0;
  std::size_t improved = 0;
  std::size_t improved_or_tied = 0;
  std::size_t total = 0;
};

/// Re-runs the pggray/3-body part of the grid once per bond dimension.
std::vector<BondRow> bond_sweep(const ExperimentGrid& grid, CostCache& cache, std::ostream* progress = nullptr);

struct ConvergenceCurve {
  std::string space;  // trace space descriptor, e.g. "3body:5%-yesDev"
  std::string solver;
  std::size_t runs = 0;
  double baseline = 0.0;
  /// "brute-force" or "best-observed" (the latter is not a proven minimum).
  std::string baseline_kind;
  /// Mean best_so_far minus baseline at eval 1..budget.
  std::vector<double> mean;
};

/// Groups traces by (space, solver) and averages best_so_far; traces that
/// stopped early carry their last value forward. Spaces missing from
/// `oracle` use the lowest cost seen in any of their traces as baseline.
std::vector<ConvergenceCurve> convergence_curves(const std::vector<Trace>& traces, std::size_t budget,
                                                 const std::map<std::string, double>& oracle);

/// One-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
double sign_test(std::size_t wins, std::size_t losses);

struct FormulationRow {
  SolverKind solver = SolverKind::ga1;
  double mean_three_body = 0.0;
  double mean_twelve_body = 0.0;
  std::size_t wins = 0;  // runs where 3-body ended strictly lower
  std::size_t losses = 0;
  double p_value = 1.0;
};

/// Paired comparison of final best costs: run k of each solver on `three_body`
/// against run k on the 12-body formulation of `mode`.
std::vector<FormulationRow> compare_formulations(const ThreeBodySpace& three_body, const TwelveBodySpace& twelve_body,
                                                 std::size_t runs, std::size_t budget, std::uint64_t master_seed,
                                                 CostCache& cache);

// --- output ---------------------------------------------------------------------

nlohmann::json summary_json(const ExperimentGrid& grid, const GridResult& result);
void write_heatmap_csv(const Heatmap& map, std::ostream& out);
void write_relative_csv(const std::vector<RelativeEntry>& entries, std::ostream& out);
void write_bond_sweep_csv(const std::vector<BondRow>& rows, std::ostream& out);
void write_convergence_csv(const std::vector<ConvergenceCurve>& curves, std::ostream& out);

/// Reads the CSV written by write_trace_csv (configs and costs only).
Trace read_trace_csv(std::istream& in);

/// Writes every artifact of a grid run into `dir` (created if missing).
void write_outputs(const std::filesystem::path& dir, const ExperimentGrid& grid, const GridResult& result,
                   const std::vector<BondRow>* sweep);

}  // namespace lineopt
