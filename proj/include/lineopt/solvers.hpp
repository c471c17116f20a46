#pragma once

// Conventional black-box solvers (three GA variants, simulated annealing,
// parallel tempering) with evaluation-budget accounting and traces.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lineopt/space.hpp"

namespace lineopt {

struct TraceEntry {
  std::size_t eval_index = 0;  // 1-based
  LineConfig config;
  Genome genome;
  double cost = 0.0;
  double best_so_far = 0.0;
};

struct Trace {
  std::string solver_id;
  std::uint64_t seed = 0;
  std::string parameterization;
  std::string space;
  std::vector<TraceEntry> entries;

  /// Best cost in the trace; +inf when empty.
  double best() const;
  /// best_so_far at eval `index` (1-based), carrying the last value forward.
  double best_at(std::size_t index) const;
};

/// CSV with header `eval_index,config,cost,best_so_far`; costs use %.17g.
void write_trace_csv(const Trace& trace, std::ostream& out);
std::string trace_csv(const Trace& trace);

using Evaluator = std::function<double(const LineConfig&)>;

struct RunOptions {
  /// Memoize repeated configs so that only distinct configs cost an evaluation.
  bool cache = true;
  /// Stop after this many consecutive proposals that needed no new evaluation.
  std::size_t stall_limit = 100000;
};

/// Wraps the raw evaluator: enforces the budget, memoizes, and appends every
/// real evaluation to a trace.
class BudgetedEvaluator {
 public:
  BudgetedEvaluator(const SearchSpace& space, Evaluator evaluator, std::size_t budget, RunOptions options,
                    Trace& trace);

  /// Cost of `genome`, or nullopt once the run has to stop.
  std::optional<double> operator()(const Genome& genome);

  /// Registers an already evaluated entry (e.g. a seed prefix) without calling
  /// the evaluator; it still counts against the budget.
  void adopt(const TraceEntry& entry);

  bool exhausted() const;
  std::size_t evaluations() const { return trace_->entries.size(); }
  std::size_t budget() const { return budget_; }
  bool seen(const Genome& genome) const;

 private:
  void append(const Genome& genome, const LineConfig& config, double cost);

  const SearchSpace* space_;
  Evaluator evaluator_;
  std::size_t budget_;
  RunOptions options_;
  Trace* trace_;
  std::unordered_map<std::uint64_t, double> cache_;
  std::size_t stalled_ = 0;
};

enum class CrossoverKind { one_point, two_point, uniform };

struct GAParams {
  std::size_t population_size = 10;
  std::size_t tournament_size = 3;
  std::size_t selected = 9;
  double mutation_prob = 0.8;
  double crossover_prob = 0.8;
  CrossoverKind crossover = CrossoverKind::one_point;
};

struct SAParams {
  double initial_temperature = 50.0;
  double cooling_factor = 1.2;
};

struct PTParams {
  std::size_t replicas = 5;
  std::size_t updates_per_swap = 4;
  double beta_min = 0.1;
  double beta_max = 10.0;

  /// Evenly spaced in log space, increasing.
  std::vector<double> betas() const;
};

/// min{1, exp((previous - proposed) / temperature)}
double sa_acceptance(double previous_cost, double proposed_cost, double temperature);
/// min{1, exp((cost_r - cost_next) * (beta_r - beta_next))}
double pt_swap_probability(double cost_r, double cost_next, double beta_r, double beta_next);

Trace run_ga(const SearchSpace& space, const GAParams& params, std::size_t budget, std::uint64_t seed,
             const Evaluator& evaluator, const RunOptions& options = {});
Trace run_sa(const SearchSpace& space, const SAParams& params, std::size_t budget, std::uint64_t seed,
             const Evaluator& evaluator, const RunOptions& options = {});
Trace run_pt(const SearchSpace& space, const PTParams& params, std::size_t budget, std::uint64_t seed,
             const Evaluator& evaluator, const RunOptions& options = {});

enum class SolverKind { ga1, ga2, gau, sa, pt };

inline constexpr std::array<SolverKind, 5> kAllSolvers = {SolverKind::ga1, SolverKind::ga2, SolverKind::gau,
                                                           SolverKind::sa, SolverKind::pt};

std::string_view to_string(SolverKind kind);
SolverKind parse_solver(std::string_view text);

/// Runs a solver with its default hyperparameters.
Trace run_solver(SolverKind kind, const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                 const Evaluator& evaluator, const RunOptions& options = {});

/// Re-draws one uniformly chosen gene to a different value (when it has one).
void mutate_one_gene(const SearchSpace& space, Genome& genome, Rng& rng);

}  // namespace lineopt
