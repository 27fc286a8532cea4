#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qroof/qroof.hpp"

namespace {

using namespace qroof;

struct FunctionalDesc {
  std::string raw;
  double log_base = 2.0;
};

// Grammar: H | renyi:p=<float> | alpha:a=<float> | hn:n=<int> | indicator:state=<path>
SpectralFunctional parse_functional(const FunctionalDesc& d) {
  const std::string& s = d.raw;
  auto param_after = [&](const std::string& prefix) {
    if (s.rfind(prefix, 0) != 0)
      throw DomainError("bad functional descriptor: " + s);
    return s.substr(prefix.size());
  };
  if (s == "H") return SpectralFunctional::von_neumann(d.log_base);
  if (s.rfind("renyi:", 0) == 0)
    return SpectralFunctional::renyi(std::stod(param_after("renyi:p=")), d.log_base);
  if (s.rfind("alpha:", 0) == 0)
    return SpectralFunctional::alpha_tangle(std::stod(param_after("alpha:a=")),
                                            d.log_base);
  if (s.rfind("hn:", 0) == 0)
    return SpectralFunctional::truncated_entropy_spec(std::stoi(param_after("hn:n=")),
                                                      d.log_base);
  if (s.rfind("indicator:", 0) == 0) {
    const LoadedState target = load_state(param_after("indicator:state="));
    if (!target.pure)
      throw DomainError("indicator target must be given in vector form");
    return SpectralFunctional::pure_indicator(*target.pure);
  }
  throw DomainError("unknown functional: " + s);
}

// H_n as a plain state function needs the decomposition search; wire it here so
// `eval`, `hull` and `closure` accept hn:n=... like any other descriptor.
StateFunction as_state_function(const SpectralFunctional& f, const OptimizerConfig& cfg) {
  if (f.kind() == FunctionalKind::truncated_entropy) {
    const int n = f.truncation_level();
    const double base = f.log_base();
    OptimizerConfig inner = cfg;
    inner.restarts = std::max(2, cfg.restarts / 8);
    inner.max_iters = std::max(100, cfg.max_iters / 10);
    return StateFunction(
        [n, base, inner](const DensityMatrix& rho) {
          return truncated_entropy(rho, std::max(n, 2), inner, base) *
                 (n == 1 ? 0.0 : 1.0);
        },
        true);
  }
  return StateFunction(f);
}

BipartiteShape parse_dims(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw DomainError("dims must look like 2x2");
  return BipartiteShape(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
}

MonotoneSpec parse_monotone_spec(const std::string& desc, const std::string& dims,
                                 double log_base) {
  const BipartiteShape shape = parse_dims(dims);
  SpectralFunctional base = desc == "eof" ? SpectralFunctional::von_neumann(log_base)
                                          : parse_functional({desc, log_base});
  return MonotoneSpec{base, TracedSide::trace_out_B, shape};
}

void emit(const std::string& path, const json& j) {
  if (path.empty())
    std::cout << j.dump(2) << '\n';
  else
    write_text(path, j.dump(2) + "\n");
}

json suite_to_json(const SuiteReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json row{{"index", r.index},
             {"lhs", round9(r.lhs)},
             {"rhs", round9(r.rhs)},
             {"pass", r.pass}};
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(std::move(row));
  }
  return json{{"schema_version", schema_version},
              {"suite", rep.suite},
              {"trials", rep.trials},
              {"failures", rep.failures},
              {"rows", std::move(rows)}};
}

int run(int argc, char** argv) {
  CLI::App app{"qroof: convex hulls, roofs and closures on quantum state space"};
  app.require_subcommand(1);

  std::string state_path, ensemble_path, channel_path, output_path, dims;
  FunctionalDesc fdesc;
  std::string spec_desc = "eof", suite, sweep_param, sweep_range = "1.1:3.0:0.1";
  std::string schedule_str = "1.5,1.25,1.1";
  int trials = 100;
  double cell_diameter = 0.1;
  std::optional<double> split_threshold;
  OptimizerConfig cfg;
  int ensemble_size = 0;

  auto add_optim = [&](CLI::App* sub) {
    sub->add_option("--restarts", cfg.restarts);
    sub->add_option("--max-iters", cfg.max_iters);
    sub->add_option("--tol", cfg.tol);
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--ensemble-size", ensemble_size);
  };

  auto* eval = app.add_subcommand("eval", "evaluate a functional on a state");
  eval->add_option("--functional", fdesc.raw)->required();
  eval->add_option("--state", state_path)->required();
  eval->add_option("--log-base", fdesc.log_base);
  add_optim(eval);

  auto* hull = app.add_subcommand("hull", "convex hull at a state");
  hull->add_option("--functional", fdesc.raw)->required();
  hull->add_option("--state", state_path)->required();
  hull->add_option("--log-base", fdesc.log_base);
  hull->add_option("--output", output_path);
  add_optim(hull);

  auto* roof = app.add_subcommand("roof", "convex roof at a state");
  roof->add_option("--functional", fdesc.raw)->required();
  roof->add_option("--state", state_path)->required();
  roof->add_option("--log-base", fdesc.log_base);
  roof->add_option("--output", output_path);
  add_optim(roof);

  auto* closure = app.add_subcommand("closure", "convex closure (biconjugate)");
  closure->add_option("--functional", fdesc.raw)->required();
  closure->add_option("--state", state_path)->required();
  closure->add_option("--log-base", fdesc.log_base);
  add_optim(closure);

  auto* monotone = app.add_subcommand("monotone", "entanglement monotone");
  monotone->add_option("--spec", spec_desc);
  monotone->add_option("--dims", dims)->required();
  monotone->add_option("--state", state_path)->required();
  monotone->add_option("--log-base", fdesc.log_base);
  monotone->add_option("--output", output_path);
  add_optim(monotone);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", suite)->required();
  verify->add_option("--trials", trials);
  verify->add_option("--output", output_path);
  add_optim(verify);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep of a monotone");
  sweep->add_option("--param", sweep_param)->required();
  sweep->add_option("--range", sweep_range);
  sweep->add_option("--dims", dims)->required();
  sweep->add_option("--state", state_path)->required();
  sweep->add_option("--output", output_path);
  add_optim(sweep);

  auto* capacity = app.add_subcommand("capacity", "Holevo capacity estimate");
  capacity->add_option("--channel", channel_path)->required();
  capacity->add_option("--p-schedule", schedule_str);
  capacity->add_option("--output", output_path);
  add_optim(capacity);

  auto* coarsen = app.add_subcommand("coarsen", "coarse-grain an ensemble");
  coarsen->add_option("--ensemble", ensemble_path)->required();
  coarsen->add_option("--cell-diameter", cell_diameter);
  coarsen->add_option("--split-threshold", split_threshold);
  coarsen->add_option("--output", output_path);

  CLI11_PARSE(app, argc, argv);
  if (ensemble_size > 0) cfg.ensemble_size_override = ensemble_size;

  if (eval->parsed()) {
    const SpectralFunctional f = parse_functional(fdesc);
    const LoadedState s = load_state(state_path);
    std::cout << format_value(as_state_function(f, cfg)(s.state)) << '\n';
    return 0;
  }
  if (hull->parsed() || roof->parsed()) {
    const SpectralFunctional f = parse_functional(fdesc);
    const LoadedState s = load_state(state_path);
    HullResult r = [&] {
      if (hull->parsed()) return convex_hull(as_state_function(f, cfg), s.state, cfg);
      const StateFunction sf = as_state_function(f, cfg);
      return convex_roof(
          [sf](const Vector& v) { return sf(DensityMatrix::trusted(v * v.adjoint())); },
          s.state, cfg);
    }();
    std::cout << format_value(r.value) << '\n';
    if (!output_path.empty()) emit(output_path, hull_result_to_json(r));
    return 0;
  }
  if (closure->parsed()) {
    const SpectralFunctional f = parse_functional(fdesc);
    const LoadedState s = load_state(state_path);
    const BiconjugateResult r =
        fenchel_biconjugate(as_state_function(f, cfg), s.state, cfg);
    std::cout << format_value(r.value) << '\n';
    return 0;
  }
  if (monotone->parsed()) {
    const MonotoneSpec spec = parse_monotone_spec(spec_desc, dims, fdesc.log_base);
    const LoadedState s = load_state(state_path);
    const HullResult r = entanglement_monotone(spec, s.state, cfg);
    std::cout << format_value(r.value) << '\n';
    if (!output_path.empty()) emit(output_path, hull_result_to_json(r));
    return 0;
  }
  if (verify->parsed()) {
    SuiteReport rep;
    if (suite == "jensen")
      rep = jensen_suite(trials, cfg.seed);
    else if (suite == "concavity")
      rep = concavity_suite(trials, cfg.seed);
    else if (suite == "roof-hull")
      rep = roof_hull_suite(std::min(trials, 50), cfg.seed, cfg);
    else if (suite == "closure-gap")
      rep = closure_gap_suite(cfg.seed, cfg);
    else if (suite == "locc")
      rep = locc_suite(trials, cfg.seed, cfg);
    else if (suite == "subadd")
      rep = subadd_suite(trials, cfg.seed, cfg);
    else if (suite == "convergence")
      rep = convergence_suite(std::min(trials, 20), cfg.seed, cfg);
    else if (suite == "energy-continuity")
      rep = energy_continuity_suite(cfg.seed, cfg);
    else
      throw DomainError("unknown suite: " + suite);
    const json j = suite_to_json(rep);
    emit(output_path, j);
    if (!rep.passed()) {
      std::cerr << "suite " << rep.suite << ": " << rep.failures << "/" << rep.trials
                << " trials failed\n";
      return 2;
    }
    return 0;
  }
  if (sweep->parsed()) {
    const BipartiteShape shape = parse_dims(dims);
    const LoadedState s = load_state(state_path);
    double lo, hi, step;
    if (std::sscanf(sweep_range.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        step <= 0)
      throw DomainError("range must be lo:hi:step");
    std::vector<SweepRow> rows;
    double prev = 0;
    for (double x = lo; x <= hi + 1e-12; x += step) {
      SpectralFunctional base = [&] {
        if (sweep_param == "alpha") return SpectralFunctional::alpha_tangle(x, fdesc.log_base);
        if (sweep_param == "p") return SpectralFunctional::renyi(x, fdesc.log_base);
        if (sweep_param == "n")
          return SpectralFunctional::truncated_entropy_spec(
              static_cast<int>(std::lround(x)), fdesc.log_base);
        throw DomainError("sweep param must be alpha, p or n");
      }();
      const MonotoneSpec spec{base, TracedSide::trace_out_B, shape};
      const HullResult r = entanglement_monotone(spec, s.state, cfg);
      rows.push_back({x, r.value, r.converged, rows.empty() ? 0.0 : r.value - prev});
      prev = r.value;
    }
    const std::string csv = sweep_csv(rows);
    if (output_path.empty())
      std::cout << csv;
    else
      write_text(output_path, csv);
    return 0;
  }
  if (capacity->parsed()) {
    const QuantumChannel channel = load_channel(channel_path);
    std::vector<double> schedule;
    std::stringstream ss(schedule_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) schedule.push_back(std::stod(tok));
    const HolevoReport rep =
        holevo_capacity_estimate(channel, std::nullopt, schedule, cfg);
    json per_p = json::array();
    for (const auto& row : rep.per_p)
      per_p.push_back({{"p", round9(row.p)}, {"value", round9(row.value)}});
    const json j{{"schema_version", schema_version},
                 {"per_p", std::move(per_p)},
                 {"extrapolated", round9(rep.extrapolated)},
                 {"chi_direct", round9(rep.chi_direct)}};
    emit(output_path, j);
    std::cout << format_value(rep.extrapolated) << '\n';
    return 0;
  }
  if (coarsen->parsed()) {
    const Ensemble e = load_ensemble(ensemble_path);
    std::optional<SplitConstraint> splitter;
    if (split_threshold)
      splitter = SplitConstraint{ConstraintOperator::number(e.dim()), *split_threshold};
    const Ensemble out = coarse_grain(e, cell_diameter, splitter);
    emit(output_path, ensemble_to_json(out));
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
