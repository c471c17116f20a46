// Command-line front end for the production-line optimizer.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lineopt/bench.hpp"

using namespace lineopt;

namespace {

ProblemCatalog catalog_from(const std::string& path) {
  return path.empty() || path == "default" ? default_catalog() : load_catalog(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void write_trace(const Trace& t, const std::string& path) {
  if (path.empty() || path == "-") {
    write_trace_csv(t, std::cout);
  } else {
    auto f = open_out(path);
    write_trace_csv(t, f);
  }
}

// Space selection shared by the solver-facing commands: a space.json file, or
// --margin/--dev to reduce on the fly, or --twelve-body.
struct SpaceArgs {
  std::string file;
  double margin = 0.05;
  std::string dev = "yes";
  bool twelve = false;

  void add(CLI::App* app) {
    app->add_option("--space", file, "space.json written by `reduce`");
    app->add_option("--margin", margin, "margin when no --space is given")->capture_default_str();
    app->add_option("--dev", dev, "yes|no")->capture_default_str();
    app->add_flag("--twelve-body", twelve, "search the unreduced 12-body formulation");
  }

  std::unique_ptr<SearchSpace> make(const ProblemCatalog& catalog) const {
    if (twelve) return std::make_unique<TwelveBodySpace>(catalog, parse_dev_mode(dev));
    if (!file.empty()) return std::make_unique<ThreeBodySpace>(load_space(file));
    return std::make_unique<ThreeBodySpace>(reduce_space(catalog, margin, parse_dev_mode(dev)));
  }
};

Genome parse_genome(const std::string& text) {
  Genome g;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) g.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  return g;
}

std::string genome_text(const Genome& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Production-line configuration optimizer"};
  app.require_subcommand(1);
  std::string catalog_path;
  app.add_option("--catalog", catalog_path, "catalog file (built-in default when omitted)");

  // dump
  auto* dump = app.add_subcommand("dump", "print the catalog in canonical form");

  // simulate
  std::string config_text, sim_trace;
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate one configuration and print its cost");
  simulate_cmd->add_option("--config", config_text, "s1,r1,...,s6,r6")->required();
  simulate_cmd->add_option("--trace", sim_trace, "per-step CSV");

  // reduce
  double margin = 0.05;
  std::string dev = "yes", space_out;
  auto* reduce_cmd = app.add_subcommand("reduce", "build a reduced 3-body space");
  reduce_cmd->add_option("--margin", margin)->capture_default_str();
  reduce_cmd->add_option("--dev", dev, "yes|no")->capture_default_str();
  reduce_cmd->add_option("--out", space_out, "space.json");

  // encode / decode
  SpaceArgs enc_space;
  std::string scheme_text = "pggray", triple_text, bits_text;
  EncodingOptions enc_options;
  const char* chain_help = "order stage 3 by the stage-2 estimate (pggray)";
  auto* encode_cmd = app.add_subcommand("encode", "genome (stage positions) to bitstring");
  enc_space.add(encode_cmd);
  encode_cmd->add_option("--scheme", scheme_text)->capture_default_str();
  encode_cmd->add_flag("--pg-chain", enc_options.pg_chain, chain_help);
  encode_cmd->add_option("--triple,--genome", triple_text, "comma separated gene values")->required();
  auto* decode_cmd = app.add_subcommand("decode", "bitstring to genome and configuration");
  enc_space.add(decode_cmd);
  decode_cmd->add_option("--scheme", scheme_text)->capture_default_str();
  decode_cmd->add_flag("--pg-chain", enc_options.pg_chain, chain_help);
  decode_cmd->add_option("--bits", bits_text)->required();

  // solve
  SpaceArgs solve_space;
  std::string solver_text = "ga1", trace_out;
  std::size_t budget = 240;
  std::uint64_t seed = 1;
  bool no_cache = false;
  auto* solve_cmd = app.add_subcommand("solve", "run one conventional solver");
  solve_space.add(solve_cmd);
  solve_cmd->add_option("--solver", solver_text)->capture_default_str();
  solve_cmd->add_option("--budget", budget)->capture_default_str();
  solve_cmd->add_option("--seed", seed)->capture_default_str();
  solve_cmd->add_option("--trace", trace_out, "trace CSV (stdout when omitted)");
  solve_cmd->add_flag("--no-cache", no_cache, "charge repeated configurations against the budget");

  // boost
  SpaceArgs boost_space;
  GeoParams geo;
  std::string selection_text = "probability";
  auto* boost_cmd = app.add_subcommand("boost", "conventional prefix followed by generative boosting");
  boost_space.add(boost_cmd);
  boost_cmd->add_option("--scheme", scheme_text)->capture_default_str();
  boost_cmd->add_flag("--pg-chain", enc_options.pg_chain, chain_help);
  boost_cmd->add_option("--solver", solver_text)->capture_default_str();
  boost_cmd->add_option("--seed", seed)->capture_default_str();
  boost_cmd->add_option("--budget", geo.total_budget)->capture_default_str();
  boost_cmd->add_option("--seed-evals", geo.seed_evals)->capture_default_str();
  boost_cmd->add_option("--chi", geo.train.max_bond)->capture_default_str();
  boost_cmd->add_option("--sweeps", geo.train.sweeps)->capture_default_str();
  boost_cmd->add_option("--learning-rate", geo.train.learning_rate)->capture_default_str();
  boost_cmd->add_option("--batch", geo.batch_size)->capture_default_str();
  boost_cmd->add_option("--oversample", geo.oversample_factor)->capture_default_str();
  boost_cmd->add_option("--select", selection_text, "probability|random")->capture_default_str();
  boost_cmd->add_flag("--warm-start", geo.warm_start);
  boost_cmd->add_option("--trace", trace_out, "trace CSV (stdout when omitted)");

  // pgco
  SpaceArgs pgco_space;
  std::size_t roots = 5, branches = 5;
  auto* pgco_cmd = app.add_subcommand("pgco", "production-guided forest search");
  pgco_space.add(pgco_cmd);
  pgco_cmd->add_option("--roots", roots)->capture_default_str();
  pgco_cmd->add_option("--branches", branches)->capture_default_str();

  // bruteforce
  SpaceArgs bf_space;
  std::uint64_t cap = kBruteForceCap;
  auto* bf_cmd = app.add_subcommand("bruteforce", "exhaustive minimum of a small space");
  bf_space.add(bf_cmd);
  bf_cmd->add_option("--cap", cap)->capture_default_str();

  // mps
  auto* mps_cmd = app.add_subcommand("mps", "generative model utilities");
  mps_cmd->require_subcommand(1);
  std::size_t sites = 8, chi = 6, count = 10;
  std::string model_in, model_out;
  auto* mps_init = mps_cmd->add_subcommand("init", "random normalized model");
  mps_init->add_option("--sites", sites)->capture_default_str();
  mps_init->add_option("--chi", chi)->capture_default_str();
  mps_init->add_option("--seed", seed)->capture_default_str();
  mps_init->add_option("--out", model_out);
  auto* mps_dump = mps_cmd->add_subcommand("dump", "re-emit a model file (load then dump)");
  mps_dump->add_option("--in", model_in)->required();
  mps_dump->add_option("--out", model_out);
  auto* mps_load = mps_cmd->add_subcommand("load", "check a model file and report its shape");
  mps_load->add_option("--in", model_in)->required();
  auto* mps_sample = mps_cmd->add_subcommand("sample", "draw bitstrings from a model");
  mps_sample->add_option("--in", model_in)->required();
  mps_sample->add_option("--count", count)->capture_default_str();
  mps_sample->add_option("--seed", seed)->capture_default_str();

  // bench
  std::string grid_path, out_dir;
  bool with_sweep = false;
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment grid");
  bench_cmd->add_option("--grid", grid_path, "grid file (key = value lines)");
  bench_cmd->add_option("--out", out_dir, "output directory")->required();
  bench_cmd->add_flag("--bond-sweep", with_sweep, "also run the bond-dimension sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    const ProblemCatalog catalog = catalog_from(catalog_path);

    if (*dump) {
      std::cout << dump_catalog(catalog);
    } else if (*simulate_cmd) {
      const auto config = LineConfig::parse(config_text);
      if (!config.valid_for(catalog)) throw std::invalid_argument("configuration references unknown shift or rate ids");
      std::ofstream trace_file;
      StepObserver observer;
      if (!sim_trace.empty()) {
        trace_file = open_out(sim_trace);
        trace_file << "step,slot_time";
        for (int j = 1; j <= kShops; ++j) trace_file << ",produced" << j;
        for (int j = 1; j <= kShops; ++j) trace_file << ",idle" << j;
        trace_file << ",buffer1,buffer2\n";
        observer = [&](const StepRecord& r) {
          char t[32];
          std::snprintf(t, sizeof t, "%03d-%02d:%02d", r.day + 1, r.slot / 2, r.slot % 2 ? 30 : 0);
          trace_file << r.step << ',' << t;
          for (auto p : r.produced) trace_file << ',' << p;
          for (auto i : r.idle) trace_file << ',' << (i ? 1 : 0);
          trace_file << ',' << r.buffers[0] << ',' << r.buffers[1] << '\n';
        };
      }
      const auto sim = simulate(catalog, config, observer);
      const auto c = cost(sim, catalog);
      std::printf("cost %.17g\nproduction_term %.17g\nidle_term %.17g\nannual_production %lld\n", c.total,
                  c.production_term, c.idle_term, static_cast<long long>(sim.annual_production()));
      for (int m = 0; m < kMonths; ++m) {
        std::printf("month %2d produced %lld target %.17g\n", m + 1,
                    static_cast<long long>(sim.monthly_production[static_cast<std::size_t>(m)]),
                    catalog.monthly_targets[static_cast<std::size_t>(m)]);
      }
    } else if (*reduce_cmd) {
      const auto space = reduce_space(catalog, margin, parse_dev_mode(dev));
      const auto sizes = space.sizes();
      std::fprintf(stderr, "%s: stage sizes %zu %zu %zu, total %llu\n", space.label().c_str(), sizes[0], sizes[1],
                   sizes[2], static_cast<unsigned long long>(space.total_size()));
      if (space_out.empty()) {
        std::cout << space_to_json(space).dump(2) << '\n';
      } else {
        save_space(space, space_out);
      }
    } else if (*encode_cmd || *decode_cmd) {
      const auto space = enc_space.make(catalog);
      const auto enc = make_encoding(parse_scheme(scheme_text), *space, enc_options);
      if (*encode_cmd) {
        std::cout << to_string(enc->encode(parse_genome(triple_text))) << '\n';
      } else {
        const auto g = enc->decode(bits_from_string(bits_text));
        if (!g) {
          std::cout << "invalid\n";
          return 3;
        }
        std::cout << genome_text(*g) << '\n' << space->decode(*g).to_string() << '\n';
      }
    } else if (*solve_cmd) {
      const auto space = solve_space.make(catalog);
      CostCache cache(catalog);
      RunOptions options;
      options.cache = !no_cache;
      const auto trace = run_solver(parse_solver(solver_text), *space, budget, seed, cache.evaluator(), options);
      write_trace(trace, trace_out);
      std::fprintf(stderr, "%s on %s: %zu evaluations, best %.17g\n", trace.solver_id.c_str(), trace.space.c_str(),
                   trace.entries.size(), trace.best());
    } else if (*boost_cmd) {
      const auto space = boost_space.make(catalog);
      geo.selection = parse_selection(selection_text);
      const Scheme scheme = boost_space.twelve ? Scheme::twelvebody_gray : parse_scheme(scheme_text);
      const auto enc = make_encoding(scheme, *space, enc_options);
      CostCache cache(catalog);
      const auto prefix = run_solver(parse_solver(solver_text), *space, geo.seed_evals, seed, cache.evaluator());
      const auto result = boost(prefix, *space, *enc, geo, cache.evaluator(), derive_seed(seed, {1}));
      write_trace(result.trace, trace_out);
      std::fprintf(stderr,
                   "%s: prefix best %.17g, boosted best %.17g, %zu evaluations, %zu iterations, %zu invalid samples, "
                   "%zu fallback\n",
                   result.trace.solver_id.c_str(), prefix.best(), result.trace.best(), result.trace.entries.size(),
                   result.stats.iterations, result.stats.samples_invalid, result.stats.fallback);
    } else if (*pgco_cmd) {
      const auto space = pgco_space.make(catalog);
      const auto* three = dynamic_cast<const ThreeBodySpace*>(space.get());
      if (!three) throw std::invalid_argument("pgco needs a 3-body space");
      const auto r = pgco_search(three->reduced(), roots, branches,
                                 [&](const LineConfig& c) { return evaluate(catalog, c); });
      std::printf("best %s\ncost %.17g\nexplored %zu\n", r.best.to_string().c_str(), r.cost.total, r.explored);
    } else if (*bf_cmd) {
      const auto space = bf_space.make(catalog);
      const auto r = brute_force(catalog, *space, cap);
      std::printf("best %s\ncost %.17g\nevaluated %llu\n", r.config.to_string().c_str(), r.cost.total,
                  static_cast<unsigned long long>(r.evaluated));
    } else if (*mps_cmd) {
      auto emit = [&](const MpsModel& m) {
        if (model_out.empty()) {
          m.write(std::cout);
        } else {
          auto f = open_out(model_out);
          m.write(f);
        }
      };
      auto load = [&]() {
        std::ifstream f(model_in);
        if (!f) throw std::runtime_error("cannot open " + model_in);
        return MpsModel::read(f);
      };
      if (*mps_init) {
        Rng rng(seed);
        TrainParams p;
        p.max_bond = chi;
        emit(init_mps(sites, p, rng));
      } else if (*mps_dump) {
        emit(load());
      } else if (*mps_load) {
        const auto m = load();
        std::printf("sites %zu max_bond %zu largest_bond %zu norm_squared %.17g\n", m.n_sites(), m.max_bond(),
                    m.largest_bond(), m.norm_squared());
      } else if (*mps_sample) {
        const auto m = load();
        Rng rng(seed);
        for (const auto& bits : m.sample(count, rng)) std::cout << to_string(bits) << '\n';
      }
    } else if (*bench_cmd) {
      ExperimentGrid grid = grid_path.empty() ? ExperimentGrid{} : load_grid(grid_path);
      if (with_sweep) grid.bond_sweep = true;
      CostCache cache(catalog);
      const auto result = run_grid(grid, cache, GridOptions{true, &std::cerr});
      std::vector<BondRow> sweep;
      if (grid.bond_sweep) sweep = bond_sweep(grid, cache, &std::cerr);
      write_outputs(out_dir, grid, result, grid.bond_sweep ? &sweep : nullptr);
      for (const auto& m : heatmap(result)) {
        std::printf("%s: improved %zu, tie %zu, worse %zu\n", std::string(to_string(m.scheme)).c_str(), m.improved,
                    m.ties, m.worse);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
