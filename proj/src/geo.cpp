#include "lineopt/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lineopt {

std::string_view to_string(Selection selection) {
  return selection == Selection::probability ? "probability" : "random";
}

Selection parse_selection(std::string_view text) {
  if (text == "probability") return Selection::probability;
  if (text == "random") return Selection::random;
  throw std::invalid_argument("unknown selection rule '" + std::string(text) + "' (probability, random)");
}

double cost_temperature(const std::vector<double>& costs) {
  if (costs.empty()) throw std::invalid_argument("reweight needs at least one cost");
  const double n = static_cast<double>(costs.size());
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
  double var = 0.0;
  for (double c : costs) var += (c - mean) * (c - mean);
  return std::max(std::sqrt(var / n), 1e-9);
}

std::vector<double> reweight(const std::vector<double>& costs, double temperature) {
  if (costs.empty()) throw std::invalid_argument("reweight needs at least one cost");
  if (!(temperature > 0.0)) throw std::invalid_argument("reweight temperature must be positive");
  const double cmin = *std::min_element(costs.begin(), costs.end());
  std::vector<double> w(costs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-(costs[i] - cmin) / temperature);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> reweight(const std::vector<double>& costs) { return reweight(costs, cost_temperature(costs)); }

bool SeedSet::add(SeedRecord record) {
  if (!keys_.insert(record.bits).second) return false;
  records_.push_back(std::move(record));
  return true;
}

WeightedDataset SeedSet::dataset() const {
  std::vector<double> costs;
  costs.reserve(records_.size());
  WeightedDataset data;
  for (const auto& r : records_) {
    data.items.push_back(r.bits);
    costs.push_back(r.cost);
  }
  data.weights = reweight(costs);
  // exp underflow can produce exact zeros far above the minimum
  for (double& w : data.weights) w = std::max(w, 1e-300);
  const double total = std::accumulate(data.weights.begin(), data.weights.end(), 0.0);
  for (double& w : data.weights) w /= total;
  return data;
}

namespace {

struct Candidate {
  BitString bits;
  Genome genome;
  double probability = 0.0;
};

// Uniformly random state not yet in `seeds`, or nullopt when none is left.
std::optional<Genome> random_unseen(const SearchSpace& space, const Encoding& encoding, const SeedSet& seeds,
                                    const std::set<BitString>& taken, Rng& rng) {
  auto fresh = [&](const Genome& g) {
    const auto bits = encoding.encode(g);
    return !seeds.contains(bits) && taken.count(bits) == 0;
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Genome g = random_genome(space, rng);
    if (fresh(g)) return g;
  }
  std::vector<std::uint64_t> left;
  for (std::uint64_t i = 0; i < space.total_size(); ++i) {
    if (fresh(space.from_flat(i))) left.push_back(i);
  }
  if (left.empty()) return std::nullopt;
  return space.from_flat(left[uniform_index(rng, left.size())]);
}

}  // namespace

BoostResult boost(const Trace& prefix, const SearchSpace& space, const Encoding& encoding, const GeoParams& params,
                  const Evaluator& evaluator, std::uint64_t seed) {
  if (params.seed_evals == 0 || params.seed_evals > params.total_budget) {
    throw GeoConfigError("seed_evals must be in 1..total_budget");
  }
  if (params.batch_size == 0 || params.oversample_factor == 0) {
    throw GeoConfigError("batch_size and oversample_factor must be >= 1");
  }
  if (prefix.space != space.descriptor()) {
    throw GeoConfigError("prefix trace was recorded on '" + prefix.space + "', not '" + space.descriptor() + "'");
  }
  const bool space_exhausted = prefix.entries.size() >= space.total_size();
  if (prefix.entries.size() < params.seed_evals && !space_exhausted) {
    throw GeoConfigError("prefix has " + std::to_string(prefix.entries.size()) + " evaluations, need " +
                         std::to_string(params.seed_evals));
  }

  BoostResult out;
  out.trace.solver_id = "geo-" + prefix.solver_id;
  out.trace.seed = seed;
  out.trace.parameterization = prefix.parameterization;
  out.trace.space = prefix.space;

  BudgetedEvaluator eval(space, evaluator, params.total_budget, RunOptions{}, out.trace);
  SeedSet seeds;
  const std::size_t take = std::min(params.seed_evals, prefix.entries.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto& e = prefix.entries[i];
    eval.adopt(e);
    seeds.add({encoding.encode(e.genome), e.config, e.cost});
  }

  Rng rng(seed);
  std::optional<MpsModel> model;
  const std::size_t n_bits = encoding.length();
  while (!eval.exhausted() && n_bits > 0) {
    ++out.stats.iterations;
    const std::size_t needed = std::min(params.batch_size, params.total_budget - eval.evaluations());

    const auto data = seeds.dataset();
    MpsModel start = (params.warm_start && model) ? *model : init_mps(n_bits, params.train, rng);
    auto trained = train(std::move(start), data, params.train);
    out.stats.floored_items += trained.floored_items;
    out.stats.rejected_sweeps += trained.rejected_sweeps;
    model = std::move(trained.model);

    std::vector<Candidate> pool;
    std::set<BitString> pooled;
    for (std::size_t round = 0; round < params.resample_rounds && pool.size() < needed; ++round) {
      for (auto& bits : model->sample(needed * params.oversample_factor, rng)) {
        ++out.stats.samples_drawn;
        if (seeds.contains(bits) || pooled.count(bits)) {
          ++out.stats.samples_seen;
          continue;
        }
        auto genome = encoding.decode(bits);
        if (!genome) {
          ++out.stats.samples_invalid;
          continue;
        }
        pooled.insert(bits);
        const double p = model->probability(bits);
        pool.push_back({std::move(bits), std::move(*genome), p});
      }
    }

    if (params.selection == Selection::probability) {
      std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.bits < b.bits;
      });
    } else {
      std::shuffle(pool.begin(), pool.end(), rng);
    }
    if (pool.size() > needed) pool.resize(needed);

    while (pool.size() < needed) {
      auto g = random_unseen(space, encoding, seeds, pooled, rng);
      if (!g) break;
      auto bits = encoding.encode(*g);
      pooled.insert(bits);
      pool.push_back({std::move(bits), std::move(*g), 0.0});
      ++out.stats.fallback;
    }
    if (pool.empty()) break;  // every state of the space has been evaluated

    for (auto& c : pool) {
      auto cost = eval(c.genome);
      if (!cost) break;
      seeds.add({std::move(c.bits), space.decode(c.genome), *cost});
    }
  }
  return out;
}

}  // namespace lineopt
