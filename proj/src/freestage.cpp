#include "lineopt/freestage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace lineopt {

std::string_view to_string(DevMode mode) { return mode == DevMode::no_dev ? "noDev" : "yesDev"; }

DevMode parse_dev_mode(std::string_view text) {
  if (text == "no" || text == "noDev" || text == "nodev") return DevMode::no_dev;
  if (text == "yes" || text == "yesDev" || text == "yesdev") return DevMode::yes_dev;
  throw std::invalid_argument("dev mode must be 'no' or 'yes', got '" + std::string(text) + "'");
}

StageIndexer::StageIndexer(const ProblemCatalog& catalog, DevMode mode)
    : mode_(mode), shift_count_(catalog.shift_count()), rate_count_(catalog.rate_count()) {
  std::vector<ShopState> shop_states;
  for (int s = 1; s <= shift_count_; ++s) {
    if (mode == DevMode::no_dev) {
      shop_states.push_back({s, catalog.nominal_rate_id});
    } else {
      for (int r = 1; r <= rate_count_; ++r) shop_states.push_back({s, r});
    }
  }
  std::vector<StageState> all;
  all.reserve(shop_states.size() * shop_states.size());
  for (const auto& a : shop_states) {
    for (const auto& b : shop_states) all.push_back({a, b});
  }
  auto output = [&](const StageState& st) {
    return catalog.shift(st.first.shift_id).weekly_hours() * catalog.rate(st.first.rate_id) +
           catalog.shift(st.second.shift_id).weekly_hours() * catalog.rate(st.second.rate_id);
  };
  // `all` is generated in (shift1, rate1, shift2, rate2) order, so a stable
  // sort on output alone gives the documented tie-break.
  std::vector<double> out(all.size());
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) out[i] = output(all[i]);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out[a] < out[b]; });

  const auto per_shop = static_cast<std::size_t>(shift_count_ * rate_count_);
  lookup_.assign(per_shop * per_shop, -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    states_.push_back(all[order[i]]);
    ideal_.push_back(out[order[i]]);
    lookup_[key(states_.back())] = static_cast<std::int32_t>(i);
  }
}

std::size_t StageIndexer::key(const StageState& s) const {
  auto shop = [&](const ShopState& x) {
    return static_cast<std::size_t>((x.shift_id - 1) * rate_count_ + (x.rate_id - 1));
  };
  return shop(s.first) * static_cast<std::size_t>(shift_count_ * rate_count_) + shop(s.second);
}

std::optional<std::size_t> StageIndexer::index_of(const StageState& state) const {
  for (const auto& shop : {state.first, state.second}) {
    if (shop.shift_id < 1 || shop.shift_id > shift_count_ || shop.rate_id < 1 || shop.rate_id > rate_count_) {
      return std::nullopt;
    }
  }
  const auto v = lookup_[key(state)];
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

StageIndexer build_indexer(const ProblemCatalog& catalog, DevMode mode) { return StageIndexer(catalog, mode); }

ProductionEstimator::ProductionEstimator(const ProblemCatalog& catalog)
    : catalog_(&catalog), hours_(scheduled_hours_table(catalog)) {}

StageEstimate ProductionEstimator::estimate(int stage, const StageState& state) const {
  if (stage < 1 || stage > kStages) throw std::out_of_range("stage must be 1..3");
  StageEstimate e;
  for (const auto& shop : {state.first, state.second}) {
    const auto& hours = hours_.at(static_cast<std::size_t>(shop.shift_id - 1));
    const double rate = catalog_->rate(shop.rate_id);
    for (int m = 0; m < kMonths; ++m) {
      e.monthly[static_cast<std::size_t>(m)] += hours[static_cast<std::size_t>(m)] * rate;
    }
  }
  e.annual = std::accumulate(e.monthly.begin(), e.monthly.end(), 0.0);
  return e;
}

StageEstimate estimate_production(const ProblemCatalog& catalog, int stage, const StageState& state) {
  return ProductionEstimator(catalog).estimate(stage, state);
}

std::uint64_t ReducedSpace::total_size() const {
  std::uint64_t n = 1;
  for (const auto& s : stages) n *= s.size();
  return n;
}

std::array<std::size_t, kStages> ReducedSpace::sizes() const {
  return {stages[0].size(), stages[1].size(), stages[2].size()};
}

LineConfig ReducedSpace::config_of(const Triple& triple) const {
  LineConfig c;
  for (std::size_t k = 0; k < kStages; ++k) {
    const auto& st = stages[k].states.at(triple[k]);
    c.shops[2 * k] = st.first;
    c.shops[2 * k + 1] = st.second;
  }
  return c;
}

std::optional<Triple> ReducedSpace::triple_of(const LineConfig& config) const {
  Triple t{};
  for (std::size_t k = 0; k < kStages; ++k) {
    const StageState st{config.shops[2 * k], config.shops[2 * k + 1]};
    const auto& states = stages[k].states;
    auto it = std::find(states.begin(), states.end(), st);
    if (it == states.end()) return std::nullopt;
    t[k] = static_cast<std::size_t>(it - states.begin());
  }
  return t;
}

std::string ReducedSpace::label() const {
  std::ostringstream out;
  out << (reduced ? margin * 100.0 : 100.0) << "%-" << to_string(dev_mode);
  return out.str();
}

ReducedSpace reduce_space(const ProblemCatalog& catalog, const StageIndexer& indexer, double margin) {
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
  ReducedSpace space;
  space.margin = margin;
  space.dev_mode = indexer.dev_mode();
  space.reduced = margin < 1.0;
  space.annual_target = catalog.annual_target();

  const ProductionEstimator estimator(catalog);
  for (int stage = 1; stage <= kStages; ++stage) {
    auto& opts = space.stages[static_cast<std::size_t>(stage - 1)];
    for (std::size_t i = 0; i < indexer.size(); ++i) {
      const double annual = estimator.estimate(stage, indexer.state(i)).annual;
      const double ratio = annual / space.annual_target;
      if (space.reduced && (ratio < 1.0 - margin || ratio > 1.0 + margin)) continue;
      opts.indexer_index.push_back(i);
      opts.states.push_back(indexer.state(i));
      opts.annual_estimate.push_back(annual);
    }
    if (opts.states.empty()) {
      std::ostringstream msg;
      msg << "infeasible margin " << margin << ": stage " << stage << " has no allowed states";
      throw InfeasibleMarginError(msg.str());
    }
  }
  return space;
}

ReducedSpace reduce_space(const ProblemCatalog& catalog, double margin, DevMode mode) {
  return reduce_space(catalog, StageIndexer(catalog, mode), margin);
}

nlohmann::json space_to_json(const ReducedSpace& space) {
  nlohmann::json doc;
  doc["format"] = "lineopt-space-1";
  doc["margin"] = space.margin;
  doc["dev_mode"] = std::string(to_string(space.dev_mode));
  doc["reduced"] = space.reduced;
  doc["annual_target"] = space.annual_target;
  doc["total_size"] = space.total_size();
  auto& stages = doc["stages"];
  stages = nlohmann::json::array();
  for (const auto& opts : space.stages) {
    nlohmann::json stage;
    stage["size"] = opts.size();
    auto& allowed = stage["allowed"];
    allowed = nlohmann::json::array();
    for (std::size_t i = 0; i < opts.size(); ++i) {
      const auto& st = opts.states[i];
      allowed.push_back({{"index", opts.indexer_index[i]},
                         {"shifts", {st.first.shift_id, st.second.shift_id}},
                         {"rates", {st.first.rate_id, st.second.rate_id}},
                         {"estimate", opts.annual_estimate[i]}});
    }
    stages.push_back(std::move(stage));
  }
  return doc;
}

ReducedSpace space_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "lineopt-space-1") throw std::runtime_error("unsupported space format");
    ReducedSpace space;
    space.margin = doc.at("margin").get<double>();
    space.dev_mode = parse_dev_mode(doc.at("dev_mode").get<std::string>());
    space.reduced = doc.at("reduced").get<bool>();
    space.annual_target = doc.at("annual_target").get<double>();
    const auto& stages = doc.at("stages");
    if (stages.size() != kStages) throw std::runtime_error("space needs exactly 3 stages");
    for (std::size_t k = 0; k < kStages; ++k) {
      auto& opts = space.stages[k];
      for (const auto& a : stages[k].at("allowed")) {
        const auto& sh = a.at("shifts");
        const auto& rt = a.at("rates");
        opts.indexer_index.push_back(a.at("index").get<std::size_t>());
        opts.states.push_back({{sh.at(0).get<int>(), rt.at(0).get<int>()}, {sh.at(1).get<int>(), rt.at(1).get<int>()}});
        opts.annual_estimate.push_back(a.at("estimate").get<double>());
      }
      if (opts.states.empty()) throw std::runtime_error("space stage has no allowed states");
    }
    if (doc.at("total_size").get<std::uint64_t>() != space.total_size()) {
      throw std::runtime_error("total_size does not match stage lists");
    }
    return space;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed space document: ") + e.what());
  }
}

void save_space(const ReducedSpace& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << space_to_json(space).dump(1) << "\n";
}

ReducedSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
  return space_from_json(doc);
}

std::vector<std::size_t> order_by_closeness(const StageOptions& options, double center) {
  std::vector<std::size_t> order(options.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(options.annual_estimate[a] - center) < std::abs(options.annual_estimate[b] - center);
  });
  return order;
}

PgcoResult pgco_search(const ReducedSpace& space, std::size_t roots, std::size_t branches,
                       const CostEvaluator& evaluator) {
  if (roots == 0 || branches == 0) throw std::invalid_argument("PGCO needs roots and branches >= 1");
  const auto root_order = order_by_closeness(space.stages[0], space.annual_target);
  const std::size_t n_roots = std::min(roots, root_order.size());

  PgcoResult best;
  best.cost.total = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n_roots; ++r) {
    const std::size_t root = root_order[r];
    const double center = space.stages[0].annual_estimate[root];
    const auto second = order_by_closeness(space.stages[1], center);
    const auto third = order_by_closeness(space.stages[2], center);
    const std::size_t n2 = std::min(branches, second.size());
    const std::size_t n3 = std::min(branches, third.size());
    for (std::size_t b = 0; b < n2; ++b) {
      for (std::size_t c = 0; c < n3; ++c) {
        const Triple t{root, second[b], third[c]};
        const auto config = space.config_of(t);
        const CostValue v = evaluator(config);
        ++best.explored;
        if (v.total < best.cost.total) {
          best.cost = v;
          best.best = config;
          best.best_triple = t;
        }
      }
    }
  }
  return best;
}

}  // namespace lineopt
