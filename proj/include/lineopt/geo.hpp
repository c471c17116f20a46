#pragma once

// Generator-enhanced booster: takes the first evaluations of a conventional
// run as seed data, then alternates MPS training, sampling and evaluation
// until the total budget is spent.

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "lineopt/encoding.hpp"
#include "lineopt/mps.hpp"
#include "lineopt/solvers.hpp"

namespace lineopt {

enum class Selection { probability, random };

std::string_view to_string(Selection selection);
Selection parse_selection(std::string_view text);

struct GeoParams {
  std::size_t seed_evals = 100;
  std::size_t total_budget = 240;
  std::size_t batch_size = 10;
  std::size_t oversample_factor = 20;
  std::size_t resample_rounds = 3;
  /// train.max_bond is the bond dimension of the generative model.
  TrainParams train{};
  Selection selection = Selection::probability;
  /// Continue from the previous iteration's model instead of a fresh one.
  bool warm_start = false;
};

class GeoConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Population standard deviation of the costs, floored at 1e-9.
double cost_temperature(const std::vector<double>& costs);
/// w_i proportional to exp(-(C_i - C_min) / temperature), normalized.
std::vector<double> reweight(const std::vector<double>& costs, double temperature);
/// reweight(costs, cost_temperature(costs)).
std::vector<double> reweight(const std::vector<double>& costs);

struct SeedRecord {
  BitString bits;
  LineConfig config;
  double cost = 0.0;
};

/// Evaluated states, unique by bitstring, in insertion order.
class SeedSet {
 public:
  /// False (and no change) when the bitstring is already present.
  bool add(SeedRecord record);
  bool contains(const BitString& bits) const { return keys_.count(bits) > 0; }
  const std::vector<SeedRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  WeightedDataset dataset() const;

 private:
  std::vector<SeedRecord> records_;
  std::set<BitString> keys_;
};

struct GeoStats {
  std::size_t iterations = 0;
  std::size_t samples_drawn = 0;
  std::size_t samples_seen = 0;
  std::size_t samples_invalid = 0;
  /// Candidates filled in by uniform sampling because the model produced too few.
  std::size_t fallback = 0;
  std::size_t floored_items = 0;
  std::size_t rejected_sweeps = 0;
};

struct BoostResult {
  Trace trace;
  GeoStats stats;
};

/// The first `params.seed_evals` entries of `prefix` open the returned trace
/// unchanged; the remaining budget is spent on model-proposed states. The
/// evaluator is called only for those new states.
BoostResult boost(const Trace& prefix, const SearchSpace& space, const Encoding& encoding, const GeoParams& params,
                  const Evaluator& evaluator, std::uint64_t seed);

}  // namespace lineopt
