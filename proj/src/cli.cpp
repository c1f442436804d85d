#include "ecp/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ecp/bv_core.hpp"
#include "ecp/copula_models.hpp"
#include "ecp/empirical_process.hpp"
#include "ecp/index_classes.hpp"
#include "ecp/resampling.hpp"
#include "ecp/serialize.hpp"
#include "ecp/stieltjes.hpp"

namespace ecp {

namespace {

void write_artifact(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + cfg.output);
  out << text;
}

Centering make_centering(const RunConfig& cfg, const CopulaModel& model) {
  Centering c;
  c.model = &model;
  if (cfg.centering == "mc") {
    c.method = Centering::Method::mc;
    c.mc_n = cfg.mc_n;
    c.mc_seed = derive_seed(cfg.seed, SeedStream::centering, 0);
  } else if (cfg.centering == "closed_form") {
    c.method = Centering::Method::closed_form;
  } else {
    throw std::invalid_argument("unknown centering '" + cfg.centering +
                                "' (use closed_form or mc)");
  }
  return c;
}

int cmd_simulate(const RunConfig& cfg) {
  const CopulaModel model = parse_model_spec(cfg.model_spec);
  const SampleMatrix s = model.sample(cfg.n, cfg.seed);
  const std::string preamble = "# config: " + config_to_json(cfg).dump();
  write_artifact(cfg, sample_to_csv(s, preamble));
  return 0;
}

int cmd_process(const RunConfig& cfg) {
  const SampleMatrix s = sample_from_csv_file(cfg.input);
  const CopulaModel model = parse_model_spec(cfg.model_spec);
  const IndexClass cls = parse_class_spec(cfg.class_spec, s.dim);
  const Centering centering = make_centering(cfg, model);
  const ProcessEvaluation ev = evaluate_process(pseudo_observations(s), cls, centering);

  nlohmann::json values;
  bool finite = true;
  for (std::size_t i = 0; i < ev.ids.size(); ++i) {
    values[ev.ids[i]] = ev.values[i];
    finite = finite && std::isfinite(ev.values[i]);
  }
  nlohmann::json j;
  j["command"] = "process";
  j["values"] = values;
  j["metadata"] = {{"n", ev.n},
                   {"dim", s.dim},
                   {"class", cls.spec},
                   {"model", model.spec()},
                   {"centering", ev.centering_method},
                   {"centering_mc_n", ev.centering_mc_n},
                   {"centering_mc_seed", ev.centering_mc_seed},
                   {"seed_rule", std::string(kSeedRule)}};
  j["config"] = config_to_json(cfg);
  write_artifact(cfg, j.dump(2) + "\n");
  if (!finite) {
    std::cerr << "process: non-finite process value\n";
    return 2;
  }
  return 0;
}

int cmd_gof(const RunConfig& cfg) {
  const SampleMatrix s = sample_from_csv_file(cfg.input);
  const CopulaModel model = parse_model_spec(cfg.model_spec);
  const IndexClass cls = parse_class_spec(cfg.class_spec, s.dim);
  const GofReport rep = gof_test(s, model, cls, cfg.B, cfg.seed, cfg.mc_n);

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "# config: " << config_to_json(cfg).dump() << "\n";
    os << "statistic,p_value,B,n\n"
       << format_double(rep.statistic) << ',' << format_double(rep.p_value) << ','
       << rep.B << ',' << rep.n << "\n";
    write_artifact(cfg, os.str());
  } else {
    nlohmann::json j;
    j["command"] = "gof";
    j["statistic"] = rep.statistic;
    j["p_value"] = rep.p_value;
    j["B"] = rep.B;
    j["n"] = rep.n;
    j["class"] = rep.class_spec;
    j["model"] = rep.model_spec;
    j["seed"] = rep.seed;
    j["centering"] = rep.centering_method;
    j["centering_mc_n"] = rep.centering_mc_n;
    j["seed_rule"] = std::string(kSeedRule);
    j["config"] = config_to_json(cfg);
    write_artifact(cfg, j.dump(2) + "\n");
  }
  return std::isfinite(rep.statistic) ? 0 : 2;
}

int cmd_mc_study(const RunConfig& cfg) {
  const CopulaModel model = parse_model_spec(cfg.model_spec);
  const IndexClass cls = parse_class_spec(cfg.class_spec, model.dim());
  const auto table = mc_study(model, cfg.n, cfg.reps, cls, cfg.B, cfg.seed, cfg.mc_n);

  bool finite = true;
  for (const auto& row : table)
    finite = finite && std::isfinite(row.mc_quantile) && std::isfinite(row.boot_quantile);

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "# config: " << config_to_json(cfg).dump() << "\n";
    os << "level,mc_quantile,boot_quantile,rel_diff\n";
    for (const auto& row : table)
      os << format_double(row.level) << ',' << format_double(row.mc_quantile) << ','
         << format_double(row.boot_quantile) << ',' << format_double(row.rel_diff)
         << "\n";
    write_artifact(cfg, os.str());
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table)
      rows.push_back({{"level", row.level},
                      {"mc_quantile", row.mc_quantile},
                      {"boot_quantile", row.boot_quantile},
                      {"rel_diff", row.rel_diff}});
    nlohmann::json j;
    j["command"] = "mc-study";
    j["rows"] = rows;
    j["seed_rule"] = std::string(kSeedRule);
    j["config"] = config_to_json(cfg);
    write_artifact(cfg, j.dump(2) + "\n");
  }
  if (!finite) {
    std::cerr << "mc-study: non-finite quantile\n";
    return 2;
  }
  return 0;
}

int cmd_ibp_check(const RunConfig& cfg) {
  const IbpMode mode =
      cfg.mode == "vanishing" ? IbpMode::vanishing_faces : IbpMode::general;
  const Box box = unit_box(cfg.dim);
  double max_abs = 0.0, max_scaled = 0.0;
  int term_count = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rf(derive_seed(cfg.seed, SeedStream::pair_gen, 2 * t));
    Rng rg(derive_seed(cfg.seed, SeedStream::pair_gen, 2 * t + 1));
    GridStepFunction f = (t % 2 == 0) ? random_step_function_jittered(rf, cfg.dim, cfg.res)
                                      : random_step_function(rf, cfg.dim, cfg.res);
    GridStepFunction g = (t % 2 == 0) ? random_step_function_jittered(rg, cfg.dim, cfg.res)
                                      : random_step_function(rg, cfg.dim, cfg.res);
    if (mode == IbpMode::vanishing_faces) {
      // zero the cells on the lower faces so that g qualifies
      std::vector<double> vals = g.cell_values();
      const auto& br = g.axis_breaks();
      std::vector<std::size_t> idx(cfg.dim, 0);
      for (std::size_t flat = 0; flat < vals.size(); ++flat) {
        for (int j = 0; j < cfg.dim; ++j)
          if (idx[j] == 0) {
            vals[flat] = 0.0;
            break;
          }
        for (int j = cfg.dim - 1; j >= 0; --j) {
          if (++idx[j] < br[j].size()) break;
          idx[j] = 0;
        }
      }
      g = GridStepFunction(br, vals);
    }
    const IbpReport rep = ibp_check(f, g, box, mode);
    term_count = rep.term_count;
    max_abs = std::max(max_abs, rep.abs_diff);
    max_scaled = std::max(max_scaled, rep.abs_diff / (1.0 + std::fabs(rep.lhs)));
  }
  const double tolerance = 1e-9;
  const bool pass = std::isfinite(max_scaled) && max_scaled <= tolerance;

  nlohmann::json j;
  j["command"] = "ibp-check";
  j["trials"] = cfg.trials;
  j["dim"] = cfg.dim;
  j["mode"] = mode == IbpMode::general ? "general" : "vanishing";
  j["term_count"] = term_count;
  j["max_abs_diff"] = max_abs;
  j["max_scaled_diff"] = max_scaled;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  j["config"] = config_to_json(cfg);
  write_artifact(cfg, j.dump(2) + "\n");
  if (!pass) std::cerr << "ibp-check: identity violated (max_scaled_diff > 1e-9)\n";
  return pass ? 0 : 2;
}

int cmd_variation(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = "variation";
  const bool exact = cfg.mode == "exact";

  if (!cfg.input.empty()) {
    std::ifstream in(cfg.input);
    if (!in) throw std::runtime_error("cannot open input file: " + cfg.input);
    nlohmann::json gj;
    in >> gj;
    const GridStepFunction f = gsf_from_json(gj);
    j["input"] = cfg.input;
    if (exact) {
      j["vitali"] = vitali_variation(f);
      j["hk"] = hk_variation(f);
      j["converged"] = true;
    } else {
      RefineOptions opts;
      opts.tol = cfg.tol;
      opts.max_depth = cfg.max_depth;
      const auto v = vitali_variation(f.as_fn(), f.dim(), opts);
      const auto h = hk_variation(f.as_fn(), f.dim(), opts);
      j["vitali"] = v.value;
      j["hk"] = h.value;
      j["converged"] = v.converged && h.converged;
      j["depth"] = std::max(v.depth, h.depth);
    }
  } else if (cfg.function_name == "prod") {
    if (exact)
      throw std::invalid_argument(
          "variation: exact mode requires a serialized step function (--input)");
    PointFn f = [](std::span<const double> x) {
      double p = 1.0;
      for (double v : x) p *= v;
      return p;
    };
    RefineOptions opts;
    opts.tol = cfg.tol;
    opts.max_depth = cfg.max_depth;
    const auto v = vitali_variation(f, cfg.dim, opts);
    const auto h = hk_variation(f, cfg.dim, opts);
    j["function"] = "prod";
    j["vitali"] = v.value;
    j["hk"] = h.value;
    j["converged"] = v.converged && h.converged;
    j["depth"] = std::max(v.depth, h.depth);
  } else {
    throw std::invalid_argument("variation: pass --input FILE or --function prod" +
                                (cfg.function_name.empty()
                                     ? std::string()
                                     : " (offending token: '" + cfg.function_name + "')"));
  }
  j["config"] = config_to_json(cfg);
  write_artifact(cfg, j.dump(2) + "\n");
  const bool ok = j["converged"].get<bool>() && std::isfinite(j["vitali"].get<double>()) &&
                  std::isfinite(j["hk"].get<double>());
  if (!ok) std::cerr << "variation: refinement did not converge within max depth\n";
  return ok ? 0 : 2;
}

}  // namespace

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  if (!cfg.model_spec.empty()) j["model"] = cfg.model_spec;
  if (!cfg.class_spec.empty()) j["class"] = cfg.class_spec;
  if (cfg.n) j["n"] = cfg.n;
  if (cfg.B) j["B"] = cfg.B;
  if (cfg.reps) j["reps"] = cfg.reps;
  if (cfg.trials) j["trials"] = cfg.trials;
  if (cfg.seed_set) j["seed"] = cfg.seed;
  j["tol"] = cfg.tol;
  j["dim"] = cfg.dim;
  j["max_depth"] = cfg.max_depth;
  j["res"] = cfg.res;
  if (!cfg.input.empty()) j["input"] = cfg.input;
  if (!cfg.output.empty()) j["out"] = cfg.output;
  j["format"] = cfg.format;
  if (!cfg.function_name.empty()) j["function"] = cfg.function_name;
  if (!cfg.mode.empty()) j["mode"] = cfg.mode;
  j["centering"] = cfg.centering;
  if (cfg.mc_n) j["mc-N"] = cfg.mc_n;
  return j;
}

int dispatch(const RunConfig& cfg) {
  if (cfg.command == "simulate") return cmd_simulate(cfg);
  if (cfg.command == "process") return cmd_process(cfg);
  if (cfg.command == "gof") return cmd_gof(cfg);
  if (cfg.command == "mc-study") return cmd_mc_study(cfg);
  if (cfg.command == "ibp-check") return cmd_ibp_check(cfg);
  if (cfg.command == "variation") return cmd_variation(cfg);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

namespace {

// Flags supplied by a JSON config file, inserted ahead of the command-line
// flags; with take-last semantics the command line wins.
std::vector<std::string> config_file_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") continue;
    std::string v;
    if (value.is_string())
      v = value.get<std::string>();
    else
      v = value.dump();
    tokens.push_back("--" + key + "=" + v);
  }
  return tokens;
}

}  // namespace

int run_cli(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;

  CLI::App app{"bounded-variation calculus, empirical copula processes and "
               "bootstrap goodness-of-fit tests"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", config_path, "JSON file supplying any flag");
    sub->add_option("--out", cfg.output, "output path (default: stdout)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "draw a seeded copula sample as CSV");
  add_common(simulate);
  simulate->add_option("--model", cfg.model_spec, "model spec, e.g. mo:alpha=0.5,beta=0.5")
      ->required();
  simulate->add_option("--n", cfg.n, "sample size")->required();
  auto* sim_seed = simulate->add_option("--seed", cfg.seed, "master seed");

  CLI::App* process = app.add_subcommand("process", "function-indexed process values");
  add_common(process);
  process->add_option("--input", cfg.input, "sample CSV")->required();
  process->add_option("--model", cfg.model_spec, "centering model spec")->required();
  process->add_option("--class", cfg.class_spec, "index class spec")->required();
  process->add_option("--centering", cfg.centering, "closed_form | mc");
  process->add_option("--mc-N", cfg.mc_n, "Monte-Carlo centering size");
  auto* proc_seed = process->add_option("--seed", cfg.seed, "master seed");

  CLI::App* gof = app.add_subcommand("gof", "bootstrap goodness-of-fit test");
  add_common(gof);
  gof->add_option("--input", cfg.input, "sample CSV")->required();
  gof->add_option("--model", cfg.model_spec, "null model spec")->required();
  gof->add_option("--class", cfg.class_spec, "index class spec")->required();
  gof->add_option("--B", cfg.B, "bootstrap replicates")->required();
  gof->add_option("--mc-N", cfg.mc_n, "Monte-Carlo centering size");
  gof->add_option("--format", cfg.format, "json | csv");
  auto* gof_seed = gof->add_option("--seed", cfg.seed, "master seed");

  CLI::App* study = app.add_subcommand("mc-study", "bootstrap validation study");
  add_common(study);
  study->add_option("--model", cfg.model_spec, "model spec")->required();
  study->add_option("--class", cfg.class_spec, "index class spec")->required();
  study->add_option("--n", cfg.n, "sample size")->required();
  study->add_option("--reps", cfg.reps, "Monte-Carlo trials")->required();
  study->add_option("--B", cfg.B, "bootstrap replicates")->required();
  study->add_option("--mc-N", cfg.mc_n, "Monte-Carlo centering size");
  study->add_option("--format", cfg.format, "json | csv");
  auto* study_seed = study->add_option("--seed", cfg.seed, "master seed");

  CLI::App* ibp = app.add_subcommand("ibp-check", "integration-by-parts identity check");
  add_common(ibp);
  ibp->add_option("--dim", cfg.dim, "dimension");
  ibp->add_option("--trials", cfg.trials, "random pairs")->required();
  ibp->add_option("--mode", cfg.mode, "general | vanishing");
  ibp->add_option("--res", cfg.res, "breakpoints per axis");
  auto* ibp_seed = ibp->add_option("--seed", cfg.seed, "master seed");

  CLI::App* variation = app.add_subcommand("variation", "Vitali and Hardy-Krause variation");
  add_common(variation);
  variation->add_option("--function", cfg.function_name, "named analytic function (prod)");
  variation->add_option("--input", cfg.input, "serialized step function JSON");
  variation->add_option("--dim", cfg.dim, "dimension for named functions");
  variation->add_option("--mode", cfg.mode, "exact | refine");
  variation->add_option("--tol", cfg.tol, "refinement tolerance");
  variation->add_option("--max-depth", cfg.max_depth, "max dyadic depth");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    // pre-scan for --config so its flags can be inserted before the
    // command-line flags (take-last: the command line wins)
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size())
        config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !args.empty() && args.front()[0] != '-') {
      const auto extra = config_file_tokens(config_path);
      std::vector<std::string> merged;
      merged.push_back(args.front());  // the subcommand
      merged.insert(merged.end(), extra.begin(), extra.end());
      merged.insert(merged.end(), args.begin() + 1, args.end());
      args = std::move(merged);
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().at(0);
    cfg.command = sub->get_name();
    cfg.seed_set = sim_seed->count() || proc_seed->count() || gof_seed->count() ||
                   study_seed->count() || ibp_seed->count();
    if (cfg.mode.empty()) cfg.mode = cfg.command == "variation" ? "refine" : "general";

    const bool needs_seed = cfg.command == "simulate" || cfg.command == "gof" ||
                            cfg.command == "mc-study" || cfg.command == "ibp-check" ||
                            (cfg.command == "process" && cfg.centering == "mc");
    if (needs_seed && !cfg.seed_set)
      throw std::invalid_argument("command '" + cfg.command +
                                  "' is stochastic and requires an explicit --seed");
    return dispatch(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ecp
