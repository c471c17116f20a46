#include "lineopt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lineopt {

double Trace::best() const {
  return entries.empty() ? std::numeric_limits<double>::infinity() : entries.back().best_so_far;
}

double Trace::best_at(std::size_t index) const {
  if (entries.empty() || index == 0) return std::numeric_limits<double>::infinity();
  return entries[std::min(index, entries.size()) - 1].best_so_far;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "eval_index,config,cost,best_so_far\n";
  char buf[128];
  for (const auto& e : trace.entries) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", e.cost, e.best_so_far);
    out << e.eval_index << ",\"" << e.config.to_string() << "\"" << buf;
  }
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  return out.str();
}

// --- budget accounting --------------------------------------------------------

BudgetedEvaluator::BudgetedEvaluator(const SearchSpace& space, Evaluator evaluator, std::size_t budget,
                                     RunOptions options, Trace& trace)
    : space_(&space), evaluator_(std::move(evaluator)), budget_(budget), options_(options), trace_(&trace) {}

bool BudgetedEvaluator::exhausted() const {
  if (trace_->entries.size() >= budget_) return true;
  if (options_.cache && cache_.size() >= space_->total_size()) return true;
  return stalled_ >= options_.stall_limit;
}

bool BudgetedEvaluator::seen(const Genome& genome) const { return cache_.count(space_->flat_index(genome)) > 0; }

void BudgetedEvaluator::append(const Genome& genome, const LineConfig& config, double cost) {
  const double prev = trace_->best();
  trace_->entries.push_back({trace_->entries.size() + 1, config, genome, cost, std::min(prev, cost)});
}

void BudgetedEvaluator::adopt(const TraceEntry& entry) {
  cache_.emplace(space_->flat_index(entry.genome), entry.cost);
  append(entry.genome, entry.config, entry.cost);
}

std::optional<double> BudgetedEvaluator::operator()(const Genome& genome) {
  if (exhausted()) return std::nullopt;
  const auto key = space_->flat_index(genome);
  if (options_.cache) {
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++stalled_;
      return it->second;
    }
  }
  const LineConfig config = space_->decode(genome);
  const double c = evaluator_(config);
  cache_[key] = c;
  stalled_ = 0;
  append(genome, config, c);
  return c;
}

// --- acceptance rules -----------------------------------------------------------

double sa_acceptance(double previous_cost, double proposed_cost, double temperature) {
  return std::min(1.0, std::exp((previous_cost - proposed_cost) / temperature));
}

double pt_swap_probability(double cost_r, double cost_next, double beta_r, double beta_next) {
  return std::min(1.0, std::exp((cost_r - cost_next) * (beta_r - beta_next)));
}

std::vector<double> PTParams::betas() const {
  std::vector<double> out(replicas);
  if (replicas == 1) {
    out[0] = beta_min;
    return out;
  }
  const double lo = std::log10(beta_min);
  const double hi = std::log10(beta_max);
  for (std::size_t r = 0; r < replicas; ++r) {
    out[r] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(r) / static_cast<double>(replicas - 1));
  }
  return out;
}

void mutate_one_gene(const SearchSpace& space, Genome& genome, Rng& rng) {
  const auto gene = uniform_index(rng, genome.size());
  const auto size = space.gene_sizes()[gene];
  if (size <= 1) return;
  auto v = static_cast<std::uint32_t>(uniform_index(rng, size - 1));
  if (v >= genome[gene]) ++v;
  genome[gene] = v;
}

namespace {

Trace make_trace(const SearchSpace& space, std::string_view solver, std::uint64_t seed) {
  Trace t;
  t.solver_id = std::string(solver);
  t.seed = seed;
  t.parameterization = std::string(to_string(space.parameterization()));
  t.space = space.descriptor();
  return t;
}

struct Individual {
  Genome genome;
  double cost = 0.0;
};

void crossover(CrossoverKind kind, Genome& a, Genome& b, Rng& rng) {
  const std::size_t n = a.size();
  if (n < 2) return;
  switch (kind) {
    case CrossoverKind::one_point: {
      const std::size_t cut = 1 + uniform_index(rng, n - 1);
      for (std::size_t i = cut; i < n; ++i) std::swap(a[i], b[i]);
      break;
    }
    case CrossoverKind::two_point: {
      // Same point draw as DEAP's cxTwoPoint.
      std::size_t p1 = 1 + uniform_index(rng, n);
      std::size_t p2 = 1 + uniform_index(rng, n - 1);
      if (p2 >= p1) {
        ++p2;
      } else {
        std::swap(p1, p2);
      }
      for (std::size_t i = p1; i < p2 && i < n; ++i) std::swap(a[i], b[i]);
      break;
    }
    case CrossoverKind::uniform: {
      for (std::size_t i = 0; i < n; ++i) {
        if (uniform01(rng) < 0.5) std::swap(a[i], b[i]);
      }
      break;
    }
  }
}

}  // namespace

Trace run_ga(const SearchSpace& space, const GAParams& params, std::size_t budget, std::uint64_t seed,
             const Evaluator& evaluator, const RunOptions& options) {
  if (budget < params.population_size) throw std::invalid_argument("GA budget must be >= population size");
  if (params.selected >= params.population_size) {
    throw std::invalid_argument("GA must select fewer individuals than the population (elitism slot)");
  }
  const char* id = params.crossover == CrossoverKind::one_point   ? "ga1"
                   : params.crossover == CrossoverKind::two_point ? "ga2"
                                                                  : "gau";
  Trace trace = make_trace(space, id, seed);
  BudgetedEvaluator eval(space, evaluator, budget, options, trace);
  Rng rng(seed);

  std::vector<Individual> population;
  Individual best{{}, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < params.population_size; ++i) {
    Genome g = random_genome(space, rng);
    auto c = eval(g);
    if (!c) return trace;
    population.push_back({std::move(g), *c});
    if (*c < best.cost) best = population.back();
  }

  while (!eval.exhausted()) {
    std::vector<Individual> offspring;
    offspring.reserve(params.selected);
    for (std::size_t s = 0; s < params.selected; ++s) {
      const Individual* winner = nullptr;
      for (std::size_t t = 0; t < params.tournament_size; ++t) {
        const auto& cand = population[uniform_index(rng, population.size())];
        if (winner == nullptr || cand.cost < winner->cost) winner = &cand;
      }
      offspring.push_back(*winner);
    }
    for (auto& ind : offspring) {
      if (uniform01(rng) < params.mutation_prob) mutate_one_gene(space, ind.genome, rng);
    }
    for (std::size_t i = 0; i + 1 < offspring.size(); i += 2) {
      if (uniform01(rng) < params.crossover_prob) {
        crossover(params.crossover, offspring[i].genome, offspring[i + 1].genome, rng);
      }
    }
    for (auto& ind : offspring) {
      auto c = eval(ind.genome);
      if (!c) return trace;
      ind.cost = *c;
      if (ind.cost < best.cost) best = ind;
    }
    offspring.push_back(best);
    population = std::move(offspring);
  }
  return trace;
}

Trace run_sa(const SearchSpace& space, const SAParams& params, std::size_t budget, std::uint64_t seed,
             const Evaluator& evaluator, const RunOptions& options) {
  if (budget < 1) throw std::invalid_argument("SA budget must be >= 1");
  if (!(params.initial_temperature > 0.0) || !(params.cooling_factor > 1.0)) {
    throw std::invalid_argument("SA needs T0 > 0 and cooling factor > 1");
  }
  Trace trace = make_trace(space, "sa", seed);
  BudgetedEvaluator eval(space, evaluator, budget, options, trace);
  Rng rng(seed);

  Genome current = random_genome(space, rng);
  auto c0 = eval(current);
  if (!c0) return trace;
  double current_cost = *c0;
  double temperature = params.initial_temperature;
  while (!eval.exhausted()) {
    Genome proposal = current;
    mutate_one_gene(space, proposal, rng);
    auto c = eval(proposal);
    if (!c) break;
    const double p = sa_acceptance(current_cost, *c, temperature);
    if (p >= 1.0 || uniform01(rng) < p) {
      current = std::move(proposal);
      current_cost = *c;
    }
    temperature /= params.cooling_factor;
  }
  return trace;
}

Trace run_pt(const SearchSpace& space, const PTParams& params, std::size_t budget, std::uint64_t seed,
             const Evaluator& evaluator, const RunOptions& options) {
  if (budget < params.replicas) throw std::invalid_argument("PT budget must be >= number of replicas");
  Trace trace = make_trace(space, "pt", seed);
  BudgetedEvaluator eval(space, evaluator, budget, options, trace);
  Rng rng(seed);
  const auto betas = params.betas();

  std::vector<Individual> replicas;
  for (std::size_t r = 0; r < params.replicas; ++r) {
    Genome g = random_genome(space, rng);
    auto c = eval(g);
    if (!c) return trace;
    replicas.push_back({std::move(g), *c});
  }
  while (!eval.exhausted()) {
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      auto& rep = replicas[r];
      const double temperature = 1.0 / betas[r];
      for (std::size_t u = 0; u < params.updates_per_swap; ++u) {
        Genome proposal = rep.genome;
        mutate_one_gene(space, proposal, rng);
        auto c = eval(proposal);
        if (!c) return trace;
        const double p = sa_acceptance(rep.cost, *c, temperature);
        if (p >= 1.0 || uniform01(rng) < p) {
          rep.genome = std::move(proposal);
          rep.cost = *c;
        }
      }
    }
    for (std::size_t r = 0; r + 1 < replicas.size(); ++r) {
      const double p = pt_swap_probability(replicas[r].cost, replicas[r + 1].cost, betas[r], betas[r + 1]);
      if (p >= 1.0 || uniform01(rng) < p) std::swap(replicas[r], replicas[r + 1]);
    }
  }
  return trace;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::ga1: return "ga1";
    case SolverKind::ga2: return "ga2";
    case SolverKind::gau: return "gau";
    case SolverKind::sa: return "sa";
    case SolverKind::pt: return "pt";
  }
  return "?";
}

SolverKind parse_solver(std::string_view text) {
  for (auto k : kAllSolvers) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown solver '" + std::string(text) + "' (ga1, ga2, gau, sa, pt)");
}

Trace run_solver(SolverKind kind, const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                 const Evaluator& evaluator, const RunOptions& options) {
  GAParams ga;
  switch (kind) {
    case SolverKind::ga1:
      ga.crossover = CrossoverKind::one_point;
      return run_ga(space, ga, budget, seed, evaluator, options);
    case SolverKind::ga2:
      ga.crossover = CrossoverKind::two_point;
      return run_ga(space, ga, budget, seed, evaluator, options);
    case SolverKind::gau:
      ga.crossover = CrossoverKind::uniform;
      return run_ga(space, ga, budget, seed, evaluator, options);
    case SolverKind::sa:
      return run_sa(space, SAParams{}, budget, seed, evaluator, options);
    case SolverKind::pt:
      return run_pt(space, PTParams{}, budget, seed, evaluator, options);
  }
  throw std::invalid_argument("unknown solver");
}

}  // namespace lineopt
