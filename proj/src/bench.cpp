#include "lineopt/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace lineopt {

// --- oracle -------------------------------------------------------------------

BruteForceResult brute_force(const SearchSpace& space, const CostEvaluator& evaluator, std::uint64_t cap) {
  const auto total = space.total_size();
  if (total > cap) {
    throw SpaceTooLargeError("space " + space.descriptor() + " has " + std::to_string(total) +
                             " states, brute-force cap is " + std::to_string(cap));
  }
  if (total == 0) throw SpaceTooLargeError("space " + space.descriptor() + " is empty");
  BruteForceResult best;
  best.cost.total = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < total; ++i) {
    Genome g = space.from_flat(i);
    LineConfig config = space.decode(g);
    CostValue c = evaluator(config);
    ++best.evaluated;
    if (c.total < best.cost.total) {
      best.config = config;
      best.genome = std::move(g);
      best.cost = c;
    }
  }
  return best;
}

BruteForceResult brute_force(const ProblemCatalog& catalog, const SearchSpace& space, std::uint64_t cap) {
  return brute_force(space, [&](const LineConfig& c) { return evaluate(catalog, c); }, cap);
}

std::size_t CostCache::Hash::operator()(const std::array<int, 2 * kShops>& k) const {
  std::uint64_t h = 0;
  for (int v : k) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

double CostCache::operator()(const LineConfig& config) {
  const auto key = config.to_12body();
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  ++simulations_;
  const double c = evaluate(catalog_, config).total;
  memo_.emplace(key, c);
  return c;
}

// --- grid -----------------------------------------------------------------------

void ExperimentGrid::validate() const {
  if (margins.empty() || dev_modes.empty() || schemes.empty() || solvers.empty()) {
    throw std::invalid_argument("grid axes must not be empty");
  }
  if (runs == 0) throw std::invalid_argument("grid needs at least one run per cell");
  if (seed_evals == 0 || seed_evals > budget) throw std::invalid_argument("seed_evals must be in 1..budget");
  for (auto s : schemes) {
    if (s == Scheme::twelvebody_gray) throw std::invalid_argument("grid schemes are 3-body encodings");
  }
  for (double m : margins) {
    if (!(m > 0.0)) throw std::invalid_argument("margins must be positive");
  }
  for (auto chi : chi_list) {
    if (chi == 0) throw std::invalid_argument("chi_list entries must be >= 1");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  if (s.empty() || s[0] == '-') throw std::invalid_argument("not a non-negative integer: '" + s + "'");
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a non-negative integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

}  // namespace

ExperimentGrid parse_grid(std::string_view text) {
  ExperimentGrid grid;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("grid line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    try {
      const auto items = split_list(value);
      if (key == "margins") {
        grid.margins.clear();
        for (const auto& v : items) grid.margins.push_back(to_double(v));
      } else if (key == "dev_modes") {
        grid.dev_modes.clear();
        for (const auto& v : items) grid.dev_modes.push_back(parse_dev_mode(v));
      } else if (key == "schemes") {
        grid.schemes.clear();
        for (const auto& v : items) grid.schemes.push_back(parse_scheme(v));
      } else if (key == "solvers") {
        grid.solvers.clear();
        for (const auto& v : items) grid.solvers.push_back(parse_solver(v));
      } else if (key == "runs") {
        grid.runs = to_uint(value);
      } else if (key == "budget") {
        grid.budget = to_uint(value);
        grid.geo.total_budget = grid.budget;
      } else if (key == "seed_evals") {
        grid.seed_evals = to_uint(value);
        grid.geo.seed_evals = grid.seed_evals;
      } else if (key == "chi") {
        grid.geo.train.max_bond = to_uint(value);
      } else if (key == "chi_list") {
        grid.chi_list.clear();
        for (const auto& v : items) grid.chi_list.push_back(to_uint(v));
      } else if (key == "bond_sweep") {
        grid.bond_sweep = to_bool(value);
      } else if (key == "twelve_body") {
        grid.twelve_body = to_bool(value);
      } else if (key == "master_seed") {
        grid.master_seed = to_uint(value);
      } else if (key == "sweeps") {
        grid.geo.train.sweeps = to_uint(value);
      } else if (key == "learning_rate") {
        grid.geo.train.learning_rate = to_double(value);
      } else if (key == "batch_size") {
        grid.geo.batch_size = to_uint(value);
      } else if (key == "oversample") {
        grid.geo.oversample_factor = to_uint(value);
      } else if (key == "selection") {
        grid.geo.selection = parse_selection(value);
      } else if (key == "warm_start") {
        grid.geo.warm_start = to_bool(value);
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("grid line " + std::to_string(lineno) + ": key '" + key + "': " + e.what());
    }
  }
  grid.validate();
  return grid;
}

ExperimentGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str());
}

std::uint64_t run_seed(std::uint64_t master, double margin, DevMode mode, Parameterization p, SolverKind solver,
                       std::size_t run) {
  return derive_seed(master, {std::bit_cast<std::uint64_t>(margin), static_cast<std::uint64_t>(mode),
                              static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(solver),
                              static_cast<std::uint64_t>(run)});
}

double CellResult::best_conventional() const {
  return conventional.empty() ? std::numeric_limits<double>::infinity()
                              : *std::min_element(conventional.begin(), conventional.end());
}

double CellResult::best_boosted() const {
  return boosted.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(boosted.begin(), boosted.end());
}

namespace {

std::uint64_t boost_seed(std::uint64_t run_seed_value, Scheme scheme) {
  return derive_seed(run_seed_value, {static_cast<std::uint64_t>(scheme) + 1});
}

}  // namespace

GridResult run_grid(const ExperimentGrid& grid, CostCache& cache, const GridOptions& options) {
  grid.validate();
  GridResult result;
  const auto& catalog = cache.catalog();
  const Evaluator evaluator = cache.evaluator();
  GeoParams geo = grid.geo;
  geo.total_budget = grid.budget;
  geo.seed_evals = grid.seed_evals;

  for (auto mode : grid.dev_modes) {
    const StageIndexer indexer(catalog, mode);
    for (double margin : grid.margins) {
      ReducedSpace reduced;
      try {
        reduced = reduce_space(catalog, indexer, margin);
      } catch (const InfeasibleMarginError& e) {
        ReducedSpace probe;
        probe.margin = margin;
        probe.dev_mode = mode;
        probe.reduced = margin < 1.0;
        result.skipped.push_back(probe.label() + ": " + e.what());
        continue;
      }
      const ThreeBodySpace space(reduced);
      const std::string label = reduced.label();
      if (space.total_size() <= kBruteForceCap) {
        const auto bf = brute_force(space, [&](const LineConfig& c) {
          CostValue v;
          v.total = cache(c);
          return v;
        });
        result.oracle[space.descriptor()] = bf.cost.total;
      }

      std::vector<std::unique_ptr<Encoding>> encodings;
      for (auto scheme : grid.schemes) encodings.push_back(make_encoding(scheme, space));

      for (auto solver : grid.solvers) {
        std::vector<CellResult> cells(grid.schemes.size());
        for (std::size_t s = 0; s < grid.schemes.size(); ++s) {
          cells[s].space = label;
          cells[s].margin = margin;
          cells[s].dev_mode = mode;
          cells[s].scheme = grid.schemes[s];
          cells[s].solver = solver;
          cells[s].space_size = space.total_size();
        }
        for (std::size_t run = 0; run < grid.runs; ++run) {
          const auto seed = run_seed(grid.master_seed, margin, mode, Parameterization::three_body, solver, run);
          Trace conv = run_solver(solver, space, grid.budget, seed, evaluator);
          for (std::size_t s = 0; s < grid.schemes.size(); ++s) {
            // a solver that stalled before seed_evals hands over everything it has
            GeoParams run_geo = geo;
            run_geo.seed_evals = std::min(geo.seed_evals, std::max<std::size_t>(conv.entries.size(), 1));
            auto boosted = boost(conv, space, *encodings[s], run_geo, evaluator, boost_seed(seed, grid.schemes[s]));
            boosted.trace.solver_id = "geo-" + std::string(to_string(grid.schemes[s])) + "-" + conv.solver_id;
            cells[s].conventional.push_back(conv.best());
            cells[s].boosted.push_back(boosted.trace.best());
            if (options.keep_traces) result.boosted_traces.push_back(std::move(boosted.trace));
          }
          if (options.keep_traces) result.conventional_traces.push_back(std::move(conv));
        }
        for (auto& c : cells) {
          if (options.progress) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-14s %-7s %-4s conv %.6g  geo %.6g  delta %.6g\n", label.c_str(),
                          std::string(to_string(c.scheme)).c_str(), std::string(to_string(solver)).c_str(),
                          c.best_conventional(), c.best_boosted(), c.delta());
            *options.progress << buf << std::flush;
          }
          result.cells.push_back(std::move(c));
        }
      }
    }
  }

  if (grid.twelve_body) {
    for (auto mode : grid.dev_modes) {
      const TwelveBodySpace space(catalog, mode);
      for (auto solver : grid.solvers) {
        for (std::size_t run = 0; run < grid.runs; ++run) {
          const auto seed = run_seed(grid.master_seed, 1.0, mode, Parameterization::twelve_body, solver, run);
          Trace t = run_solver(solver, space, grid.budget, seed, evaluator);
          if (options.keep_traces) result.conventional_traces.push_back(std::move(t));
        }
      }
    }
  }
  return result;
}

// --- analysis -------------------------------------------------------------------

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::improved: return "improved";
    case Outcome::tie: return "tie";
    case Outcome::worse: return "worse";
  }
  return "?";
}

Outcome classify(double delta) {
  if (delta > 0.0) return Outcome::improved;
  if (delta == 0.0) return Outcome::tie;
  return Outcome::worse;
}

std::vector<Heatmap> heatmap(const GridResult& result) {
  std::vector<Heatmap> maps;
  auto map_for = [&](Scheme scheme) -> Heatmap& {
    for (auto& m : maps) {
      if (m.scheme == scheme) return m;
    }
    maps.push_back({scheme, {}, 0, 0, 0});
    return maps.back();
  };
  // group cells by (scheme, space), preserving grid order
  std::vector<std::pair<Scheme, std::string>> groups;
  for (const auto& c : result.cells) {
    std::pair<Scheme, std::string> key{c.scheme, c.space};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [scheme, space] : groups) {
    std::vector<const CellResult*> row;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : result.cells) {
      if (c.scheme != scheme || c.space != space) continue;
      row.push_back(&c);
      lo = std::min({lo, c.best_conventional(), c.best_boosted()});
      hi = std::max({hi, c.best_conventional(), c.best_boosted()});
    }
    auto marker = [](bool conv, bool geo) -> std::string {
      if (conv && geo) return "both";
      if (conv) return "conv";
      if (geo) return "geo";
      return "";
    };
    Heatmap& map = map_for(scheme);
    for (const auto* c : row) {
      HeatmapCell h;
      h.space = space;
      h.solver = c->solver;
      h.conventional = c->best_conventional();
      h.boosted = c->best_boosted();
      h.delta = c->delta();
      h.outcome = classify(h.delta);
      h.best_marker = marker(h.conventional == lo, h.boosted == lo);
      h.worst_marker = marker(h.conventional == hi, h.boosted == hi);
      switch (h.outcome) {
        case Outcome::improved: ++map.improved; break;
        case Outcome::tie: ++map.ties; break;
        case Outcome::worse: ++map.worse; break;
      }
      map.cells.push_back(std::move(h));
    }
  }
  return maps;
}

RelativeTables relative_tables(const GridResult& result) {
  RelativeTables out;
  std::vector<std::pair<Scheme, std::string>> groups;
  for (const auto& c : result.cells) {
    std::pair<Scheme, std::string> key{c.scheme, c.space};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  std::vector<std::string> conv_done;
  for (const auto& [scheme, space] : groups) {
    std::vector<const CellResult*> row;
    double conv_min = std::numeric_limits<double>::infinity();
    double geo_min = std::numeric_limits<double>::infinity();
    for (const auto& c : result.cells) {
      if (c.scheme != scheme || c.space != space) continue;
      row.push_back(&c);
      conv_min = std::min(conv_min, c.best_conventional());
      geo_min = std::min(geo_min, c.best_boosted());
    }
    // conventional results do not depend on the encoding; report each space once
    const bool conv_new = std::find(conv_done.begin(), conv_done.end(), space) == conv_done.end();
    if (conv_new) conv_done.push_back(space);
    for (const auto* c : row) {
      if (conv_new) out.conventional.push_back({space, std::nullopt, c->solver, c->best_conventional() - conv_min});
      out.boosted.push_back({space, scheme, c->solver, c->best_boosted() - geo_min});
    }
  }
  return out;
}

std::vector<BondRow> bond_sweep(const ExperimentGrid& grid, CostCache& cache, std::ostream* progress) {
  std::vector<BondRow> rows;
  for (auto chi : grid.chi_list) {
    ExperimentGrid g = grid;
    g.schemes = {Scheme::pggray};
    g.twelve_body = false;
    g.geo.train.max_bond = chi;
    const auto result = run_grid(g, cache, GridOptions{false, nullptr});
    BondRow row;
    row.chi = chi;
    for (const auto& c : result.cells) {
      ++row.total;
      const double d = c.delta();
      if (d > 0.0) ++row.improved;
      if (d >= 0.0) ++row.improved_or_tied;
    }
    if (progress) {
      *progress << "chi " << chi << ": improved " << row.improved << ", improved or tied " << row.improved_or_tied
                << " of " << row.total << "\n"
                << std::flush;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ConvergenceCurve> convergence_curves(const std::vector<Trace>& traces, std::size_t budget,
                                                 const std::map<std::string, double>& oracle) {
  std::vector<ConvergenceCurve> curves;
  std::map<std::string, double> observed;
  for (const auto& t : traces) {
    auto [it, inserted] = observed.emplace(t.space, t.best());
    if (!inserted) it->second = std::min(it->second, t.best());
  }
  for (const auto& t : traces) {
    auto it = std::find_if(curves.begin(), curves.end(), [&](const ConvergenceCurve& c) {
      return c.space == t.space && c.solver == t.solver_id;
    });
    if (it == curves.end()) {
      ConvergenceCurve c;
      c.space = t.space;
      c.solver = t.solver_id;
      if (auto o = oracle.find(t.space); o != oracle.end()) {
        c.baseline = o->second;
        c.baseline_kind = "brute-force";
      } else {
        c.baseline = observed[t.space];
        c.baseline_kind = "best-observed";
      }
      c.mean.assign(budget, 0.0);
      curves.push_back(std::move(c));
      it = std::prev(curves.end());
    }
    ++it->runs;
    for (std::size_t i = 0; i < budget; ++i) it->mean[i] += t.best_at(i + 1);
  }
  for (auto& c : curves) {
    for (auto& v : c.mean) v = v / static_cast<double>(c.runs) - c.baseline;
  }
  return curves;
}

double sign_test(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                            std::lgamma(static_cast<double>(n - k) + 1.0) - static_cast<double>(n) * std::log(2.0);
    p += std::exp(log_term);
  }
  return std::min(1.0, p);
}

std::vector<FormulationRow> compare_formulations(const ThreeBodySpace& three_body, const TwelveBodySpace& twelve_body,
                                                 std::size_t runs, std::size_t budget, std::uint64_t master_seed,
                                                 CostCache& cache) {
  const Evaluator evaluator = cache.evaluator();
  const auto& reduced = three_body.reduced();
  std::vector<FormulationRow> rows;
  for (auto solver : kAllSolvers) {
    FormulationRow row;
    row.solver = solver;
    for (std::size_t run = 0; run < runs; ++run) {
      const auto s3 = run_seed(master_seed, reduced.margin, reduced.dev_mode, Parameterization::three_body, solver, run);
      const auto s12 = run_seed(master_seed, 1.0, twelve_body.dev_mode(), Parameterization::twelve_body, solver, run);
      const double b3 = run_solver(solver, three_body, budget, s3, evaluator).best();
      const double b12 = run_solver(solver, twelve_body, budget, s12, evaluator).best();
      row.mean_three_body += b3;
      row.mean_twelve_body += b12;
      if (b3 < b12) ++row.wins;
      if (b3 > b12) ++row.losses;
    }
    row.mean_three_body /= static_cast<double>(runs);
    row.mean_twelve_body /= static_cast<double>(runs);
    row.p_value = sign_test(row.wins, row.losses);
    rows.push_back(row);
  }
  return rows;
}

// --- output ---------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string file_safe(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '%') {
      out += "pct";
    } else if (c == ':') {
      out += '_';
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

nlohmann::json summary_json(const ExperimentGrid& grid, const GridResult& result) {
  using nlohmann::json;
  json doc;
  json g;
  g["margins"] = grid.margins;
  for (auto m : grid.dev_modes) g["dev_modes"].push_back(std::string(to_string(m)));
  for (auto s : grid.schemes) g["schemes"].push_back(std::string(to_string(s)));
  for (auto s : grid.solvers) g["solvers"].push_back(std::string(to_string(s)));
  g["runs"] = grid.runs;
  g["budget"] = grid.budget;
  g["seed_evals"] = grid.seed_evals;
  g["chi"] = grid.geo.train.max_bond;
  g["sweeps"] = grid.geo.train.sweeps;
  g["learning_rate"] = grid.geo.train.learning_rate;
  g["batch_size"] = grid.geo.batch_size;
  g["oversample"] = grid.geo.oversample_factor;
  g["selection"] = std::string(to_string(grid.geo.selection));
  g["warm_start"] = grid.geo.warm_start;
  g["master_seed"] = grid.master_seed;
  doc["grid"] = g;

  json cells = json::array();
  for (const auto& c : result.cells) {
    json j;
    j["space"] = c.space;
    j["margin"] = c.margin;
    j["dev_mode"] = std::string(to_string(c.dev_mode));
    j["scheme"] = std::string(to_string(c.scheme));
    j["solver"] = std::string(to_string(c.solver));
    j["space_size"] = c.space_size;
    j["runs"] = c.conventional.size();
    j["best_conventional"] = c.best_conventional();
    j["best_boosted"] = c.best_boosted();
    j["delta"] = c.delta();
    j["outcome"] = std::string(to_string(classify(c.delta())));
    j["conventional"] = c.conventional;
    j["boosted"] = c.boosted;
    cells.push_back(std::move(j));
  }
  doc["cells"] = std::move(cells);
  doc["skipped"] = result.skipped;
  doc["oracle"] = result.oracle;
  json maps = json::array();
  for (const auto& m : heatmap(result)) {
    maps.push_back({{"scheme", std::string(to_string(m.scheme))},
                    {"improved", m.improved},
                    {"tie", m.ties},
                    {"worse", m.worse}});
  }
  doc["heatmaps"] = std::move(maps);
  return doc;
}

void write_heatmap_csv(const Heatmap& map, std::ostream& out) {
  out << "space,solver,conventional,boosted,delta,outcome,best_marker,worst_marker\n";
  for (const auto& c : map.cells) {
    out << c.space << ',' << to_string(c.solver) << ',' << fmt(c.conventional) << ',' << fmt(c.boosted) << ','
        << fmt(c.delta) << ',' << to_string(c.outcome) << ',' << c.best_marker << ',' << c.worst_marker << '\n';
  }
}

void write_relative_csv(const std::vector<RelativeEntry>& entries, std::ostream& out) {
  out << "space,scheme,solver,value\n";
  for (const auto& e : entries) {
    out << e.space << ',' << (e.scheme ? std::string(to_string(*e.scheme)) : std::string("none")) << ','
        << to_string(e.solver) << ',' << fmt(e.value) << '\n';
  }
}

void write_bond_sweep_csv(const std::vector<BondRow>& rows, std::ostream& out) {
  out << "chi,improved,improved_or_tied,total,pct_improved,pct_improved_or_tied\n";
  for (const auto& r : rows) {
    const double t = r.total ? static_cast<double>(r.total) : 1.0;
    out << r.chi << ',' << r.improved << ',' << r.improved_or_tied << ',' << r.total << ','
        << fmt(100.0 * static_cast<double>(r.improved) / t) << ','
        << fmt(100.0 * static_cast<double>(r.improved_or_tied) / t) << '\n';
  }
}

void write_convergence_csv(const std::vector<ConvergenceCurve>& curves, std::ostream& out) {
  out << "space,solver,runs,baseline,baseline_kind,eval_index,mean_above_baseline\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      out << c.space << ',' << c.solver << ',' << c.runs << ',' << fmt(c.baseline) << ',' << c.baseline_kind << ','
          << i + 1 << ',' << fmt(c.mean[i]) << '\n';
    }
  }
}

Trace read_trace_csv(std::istream& in) {
  Trace t;
  std::string line;
  if (!std::getline(in, line) || line != "eval_index,config,cost,best_so_far") {
    throw std::runtime_error("trace CSV: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto q1 = line.find('"');
    const auto q2 = line.find('"', q1 + 1);
    if (q1 == std::string::npos || q2 == std::string::npos) throw std::runtime_error("trace CSV: unquoted config");
    TraceEntry e;
    e.eval_index = std::stoull(line.substr(0, q1 - 1));
    e.config = LineConfig::parse(line.substr(q1 + 1, q2 - q1 - 1));
    const auto rest = line.substr(q2 + 2);
    const auto comma = rest.find(',');
    e.cost = std::strtod(rest.substr(0, comma).c_str(), nullptr);
    e.best_so_far = std::strtod(rest.substr(comma + 1).c_str(), nullptr);
    t.entries.push_back(std::move(e));
  }
  return t;
}

void write_outputs(const std::filesystem::path& dir, const ExperimentGrid& grid, const GridResult& result,
                   const std::vector<BondRow>* sweep) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "traces");
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(dir / "summary.json");
    f << summary_json(grid, result).dump(2) << '\n';
  }
  for (const auto& m : heatmap(result)) {
    auto f = open(dir / ("heatmap_" + std::string(to_string(m.scheme)) + ".csv"));
    write_heatmap_csv(m, f);
  }
  const auto rel = relative_tables(result);
  {
    auto f = open(dir / "relative_conv.csv");
    write_relative_csv(rel.conventional, f);
  }
  {
    auto f = open(dir / "relative_geo.csv");
    write_relative_csv(rel.boosted, f);
  }
  if (sweep) {
    auto f = open(dir / "bond_sweep.csv");
    write_bond_sweep_csv(*sweep, f);
  }
  std::map<std::string, std::vector<Trace>> by_formulation;
  for (const auto& t : result.conventional_traces) by_formulation[t.parameterization].push_back(t);
  for (const auto& [formulation, traces] : by_formulation) {
    auto f = open(dir / ("convergence_" + formulation + ".csv"));
    write_convergence_csv(convergence_curves(traces, grid.budget, result.oracle), f);
  }
  auto dump = [&](const std::vector<Trace>& traces, const std::string& kind) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      char idx[16];
      std::snprintf(idx, sizeof idx, "%05zu", i);
      const auto& t = traces[i];
      auto f = open(dir / "traces" / (kind + "_" + idx + "_" + file_safe(t.space) + "_" + t.solver_id + ".csv"));
      write_trace_csv(t, f);
    }
  };
  dump(result.conventional_traces, "conv");
  dump(result.boosted_traces, "geo");
}

}  // namespace lineopt
