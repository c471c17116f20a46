#pragma once

// Free-stage approximation: per-stage production estimates that ignore the
// buffers, the margin-based reduced search space built from them, and the
// production-guided forest search (PGCO).

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lineopt/catalog.hpp"
#include "lineopt/simulator.hpp"

namespace lineopt {

/// noDev pins every shop to the nominal rate; yesDev frees the rates.
enum class DevMode { no_dev, yes_dev };

std::string_view to_string(DevMode mode);
/// Accepts "no"/"yes" and "noDev"/"yesDev".
DevMode parse_dev_mode(std::string_view text);

/// State of one stage: its two parallel shops.
struct StageState {
  ShopState first;
  ShopState second;

  friend auto operator<=>(const StageState&, const StageState&) = default;
};

/// All single-stage states under a dev mode, sorted by ideal hourly output.
class StageIndexer {
 public:
  StageIndexer(const ProblemCatalog& catalog, DevMode mode);

  DevMode dev_mode() const { return mode_; }
  std::size_t size() const { return states_.size(); }
  const StageState& state(std::size_t index) const { return states_.at(index); }
  /// Sum over both shops of weekly scheduled hours times cars per hour.
  double ideal_output(std::size_t index) const { return ideal_.at(index); }
  std::optional<std::size_t> index_of(const StageState& state) const;

 private:
  std::size_t key(const StageState& s) const;

  DevMode mode_;
  int shift_count_;
  int rate_count_;
  std::vector<StageState> states_;
  std::vector<double> ideal_;
  std::vector<std::int32_t> lookup_;
};

StageIndexer build_indexer(const ProblemCatalog& catalog, DevMode mode);

struct StageEstimate {
  std::array<double, kMonths> monthly{};
  double annual = 0.0;
};

/// Precomputes scheduled hours so that many stage states can be estimated cheaply.
class ProductionEstimator {
 public:
  explicit ProductionEstimator(const ProblemCatalog& catalog);

  /// The formula is identical for every stage; `stage` (1..3) is accepted for
  /// catalogs that might differentiate stages later.
  StageEstimate estimate(int stage, const StageState& state) const;

 private:
  const ProblemCatalog* catalog_;
  std::vector<std::array<double, kMonths>> hours_;
};

StageEstimate estimate_production(const ProblemCatalog& catalog, int stage, const StageState& state);

/// Allowed states of one stage, in indexer order.
struct StageOptions {
  std::vector<std::size_t> indexer_index;
  std::vector<StageState> states;
  std::vector<double> annual_estimate;

  std::size_t size() const { return states.size(); }
};

using Triple = std::array<std::size_t, kStages>;

struct ReducedSpace {
  double margin = 1.0;
  DevMode dev_mode = DevMode::yes_dev;
  /// False when margin >= 1, i.e. the whole stage-state set is kept.
  bool reduced = false;
  double annual_target = 0.0;
  std::array<StageOptions, kStages> stages;

  std::uint64_t total_size() const;
  std::array<std::size_t, kStages> sizes() const;
  LineConfig config_of(const Triple& triple) const;
  std::optional<Triple> triple_of(const LineConfig& config) const;
  /// Short label such as "5%-yesDev".
  std::string label() const;
};

class InfeasibleMarginError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keeps stage states with 1 - margin <= estimate / annual_target <= 1 + margin.
/// A margin of 1 or more disables the reduction.
ReducedSpace reduce_space(const ProblemCatalog& catalog, const StageIndexer& indexer, double margin);
ReducedSpace reduce_space(const ProblemCatalog& catalog, double margin, DevMode mode);

nlohmann::json space_to_json(const ReducedSpace& space);
ReducedSpace space_from_json(const nlohmann::json& doc);
void save_space(const ReducedSpace& space, const std::string& path);
ReducedSpace load_space(const std::string& path);

/// Indices of `options` sorted by |estimate - center|, ties by lower index.
std::vector<std::size_t> order_by_closeness(const StageOptions& options, double center);

using CostEvaluator = std::function<CostValue(const LineConfig&)>;

struct PgcoResult {
  LineConfig best;
  Triple best_triple{};
  CostValue cost;
  std::size_t explored = 0;
};

/// Forest search: `roots` stage-1 states closest to the target, then for each
/// root `branches` stage-2 and `branches` stage-3 states closest to the root's
/// estimate; every triple in the forest is evaluated.
PgcoResult pgco_search(const ReducedSpace& space, std::size_t roots, std::size_t branches,
                       const CostEvaluator& evaluator);

}  // namespace lineopt
