// Command line surface of the laboratory.
//
//   kslab run <file>      run one scenario (JSON file or preset name), export the report
//   kslab sweep <dir>     run every *.json scenario under a directory concurrently
//   kslab check <file>    validate a scenario and audit its initial-data hypotheses
//   kslab gns             survey sharpened interpolation constants into a table
//   kslab linear          per-mode amplification study of the linearized systems
//   kslab ode             integrate the vanishing-point reference system
//   kslab presets         list the built-in scenarios or write them as JSON
//
// The output directory resolves in order: --out, the scenario's own output.dir
// (run/sweep only), the KSLAB_OUT environment variable, "out".

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kslab/inequalities.hpp"
#include "kslab/lab.hpp"
#include "kslab/linear.hpp"
#include "kslab/ode.hpp"

namespace fs = std::filesystem;
using namespace kslab;

namespace {

// --out flag > scenario's own dir (passed by caller when applicable) >
// KSLAB_OUT > "out".
fs::path resolve_out(const std::string& flag, const std::string& scenario_dir = "") {
  if (!flag.empty()) return flag;
  if (!scenario_dir.empty()) return scenario_dir;
  if (const char* env = std::getenv("KSLAB_OUT"); env && *env) return env;
  return "out";
}

// `run` and `check` accept either a JSON path or a built-in preset name.
Scenario load_by_name_or_path(const std::string& ref) {
  if (fs::exists(ref)) return load_scenario(ref);
  const auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), ref) != names.end())
    return builtin_scenario(ref);
  throw std::invalid_argument("no scenario file or preset named \"" + ref + "\"");
}

void apply_overrides(Scenario& sc, const std::optional<int>& n,
                     const std::optional<std::uint64_t>& seed) {
  if (n) sc.n = *n;
  if (seed) {
    sc.initial.seed = *seed;
    sc.initial.vel_seed = *seed + 1;
  }
}

void print_report_summary(const RunReport& rep, const fs::path& dir) {
  std::cout << rep.scenario.name << ": " << to_string(rep.termination)
            << " at t = " << rep.final_t << " after " << rep.steps
            << " steps  [config " << rep.config_hash << "]\n";
  if (rep.termination == Termination::error)
    std::cout << "  error: " << rep.detail << "\n";
  if (rep.hypotheses.violating()) {
    std::cout << "  hypothesis violations:";
    for (const std::string& v : rep.hypotheses.violations) std::cout << ' ' << v;
    std::cout << "\n";
  }
  if (rep.fit)
    std::cout << "  blow-up fit: T* = " << rep.fit->t_star
              << ", exponent = " << rep.fit->exponent << " (r^2 = " << rep.fit->r2
              << ", window " << rep.fit->window << ")\n";
  if (!dir.empty()) std::cout << "  report -> " << dir.string() << "\n";
}

int cmd_run(const std::string& ref, const std::string& out_flag,
            const std::optional<int>& n, const std::optional<std::uint64_t>& seed) {
  Scenario sc = load_by_name_or_path(ref);
  apply_overrides(sc, n, seed);
  const RunReport rep = run_scenario(sc);
  const fs::path dir = export_report(rep, resolve_out(out_flag, sc.output.dir));
  print_report_summary(rep, dir);
  return 0;
}

int cmd_sweep(const std::string& dir, const std::string& out_flag, int parallelism,
              const std::optional<int>& n, const std::optional<std::uint64_t>& seed) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "kslab: no *.json scenarios under " << dir << "\n";
    return 1;
  }
  std::vector<Scenario> scenarios;
  scenarios.reserve(files.size());
  for (const fs::path& f : files) {
    Scenario sc = load_scenario(f);
    apply_overrides(sc, n, seed);
    scenarios.push_back(std::move(sc));
  }
  if (parallelism <= 0)
    parallelism = std::max(1u, std::thread::hardware_concurrency());

  const std::vector<RunReport> reports = sweep(scenarios, parallelism);
  int failures = 0;
  for (const RunReport& rep : reports) {
    fs::path report_dir;
    if (rep.termination != Termination::error)
      report_dir = export_report(rep, resolve_out(out_flag, rep.scenario.output.dir));
    else
      ++failures;
    print_report_summary(rep, report_dir);
  }
  std::cout << reports.size() - static_cast<std::size_t>(failures) << " of "
            << reports.size() << " scenarios completed\n";
  return failures == 0 ? 0 : 1;
}

int cmd_check(const std::string& ref, const std::optional<int>& n,
              const std::optional<std::uint64_t>& seed) {
  Scenario sc = load_by_name_or_path(ref);
  apply_overrides(sc, n, seed);

  const std::vector<ConfigIssue> issues = validate_config(model_config(sc));
  bool fatal = false;
  for (const ConfigIssue& issue : issues)
    if (issue.fatal) {
      std::cout << "fatal: " << issue.code << ": " << issue.message << "\n";
      fatal = true;
    }
  if (fatal) return 2;

  const HypothesisReport rep = check_hypotheses(sc, initial_state(sc));
  if (!rep.violating()) {
    std::cout << sc.name << ": hypotheses satisfied\n";
    return 0;
  }
  std::cout << sc.name << ": hypothesis violations\n";
  for (const std::string& v : rep.violations) std::cout << "  " << v << "\n";
  return 1;
}

int cmd_gns(const std::string& out_flag, std::string table_file, int dim, int n,
            int samples, std::uint64_t seed) {
  if (table_file.empty())
    table_file = (resolve_out(out_flag) / "gns_constants.txt").string();
  ConstantTable table;
  if (fs::exists(table_file)) table = ConstantTable::load(table_file);
  const int surveyed = survey_constants(table, dim, n, samples, seed);
  if (const fs::path parent = fs::path(table_file).parent_path(); !parent.empty())
    fs::create_directories(parent);
  table.save(table_file);
  std::cout << "surveyed " << surveyed << " fields (dim " << dim << ", n " << n
            << ", seed " << seed << "); " << table.entries().size()
            << " constants -> " << table_file << "\n";
  return 0;
}

int cmd_linear(const std::string& out_flag, std::string csv_file, std::string kind_arg,
               int k_min, int k_max, double T, double dt) {
  std::vector<LinearSystemKind> kinds;
  if (kind_arg == "all")
    kinds = {LinearSystemKind::ks_wellposed, LinearSystemKind::ks_illposed_c,
             LinearSystemKind::ks_illposed_rho, LinearSystemKind::ksf1d,
             LinearSystemKind::ksf1d_good};
  else
    kinds = {parse_linear_kind(kind_arg)};
  if (k_min < 0 || k_max < k_min)
    throw std::invalid_argument("wavenumber range must satisfy 0 <= k-min <= k-max");
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k) ks.push_back(k);

  if (csv_file.empty()) csv_file = (resolve_out(out_flag) / "linear_modes.csv").string();
  if (const fs::path parent = fs::path(csv_file).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream os(csv_file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + csv_file);
  // write_mode_csv emits a complete CSV including the header; keep a single
  // header when several kinds share one file.
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::ostringstream block;
    write_mode_csv(block, kinds[i], ks, T, dt);
    std::string text = block.str();
    if (i > 0) text.erase(0, text.find('\n') + 1);
    os << text;
  }
  std::cout << "mode table -> " << csv_file << "\n";

  // Slope of log amplification against k: the ill-posedness signature.
  std::vector<int> fit_ks;
  for (int k : ks)
    if (k >= 1) fit_ks.push_back(k);
  for (LinearSystemKind kind : kinds) {
    if (fit_ks.size() < 4) break;
    std::cout << to_string(kind) << ": ";
    try {
      const SlopeFit fit = illposedness_slope(kind, fit_ks, T, dt);
      std::cout << "slope " << fit.slope << " per k (r^2 = " << fit.r2
                << "), energy slope " << fit.energy_slope << "\n";
    } catch (const std::runtime_error&) {
      std::cout << "no monotone growth in k (not ill-posed on this window)\n";
    }
  }
  return 0;
}

int cmd_ode(const std::string& kind_arg, double C0, double R0, int d, double k1,
            double chi1, double rtol, const std::string& csv_file) {
  BlowupOdeSpec spec;
  if (kind_arg == "scalar") {
    spec.kind = BlowupOdeKind::scalar_1d;
  } else if (kind_arg == "scalar-general") {
    spec.kind = BlowupOdeKind::scalar_general_chik;
    spec.k1 = k1;
    spec.chi1 = chi1;
  } else if (kind_arg == "multi-d") {
    spec.kind = BlowupOdeKind::multi_d;
    spec.d = d;
  } else {
    throw std::invalid_argument("unknown ode kind: " + kind_arg);
  }

  std::vector<double> init;
  if (spec.kind == BlowupOdeKind::multi_d) {
    for (int a = 0; a < spec.d; ++a) init.push_back(C0);
    for (int a = 0; a < spec.d; ++a) init.push_back(R0);
  } else {
    init = {C0, R0};
  }

  const BlowupResult res = blowup_time(spec, init, rtol);
  const double quad = blowup_time_quadrature(spec, C0, R0);
  std::printf("T* (adaptive)    = %.15g\n", res.t_star);
  std::printf("T* (quadrature)  = %.15g\n", quad);
  std::printf("difference       = %.3g\n", std::abs(res.t_star - quad));
  std::printf("invariant drift  = %.3g  (R - lambda C^2 while C <= 1e3)\n",
              res.first_integral_drift);
  std::printf("steps            = %ld accepted, %ld rejected\n", res.accepted_steps,
              res.rejected_steps);
  if (!csv_file.empty()) {
    if (const fs::path parent = fs::path(csv_file).parent_path(); !parent.empty())
      fs::create_directories(parent);
    std::ofstream os(csv_file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + csv_file);
    os << "C0,R0,t_star_adaptive,t_star_quadrature,first_integral_drift\n";
    write_blowup_csv(os, spec, std::vector<std::array<double, 2>>{{C0, R0}}, rtol);
    std::cout << "row -> " << csv_file << "\n";
  }
  return 0;
}

int cmd_presets(const std::string& dir) {
  if (dir.empty()) {
    for (const std::string& name : builtin_scenario_names()) std::cout << name << "\n";
    return 0;
  }
  fs::create_directories(dir);
  for (const std::string& name : builtin_scenario_names()) {
    const fs::path path = fs::path(dir) / (name + ".json");
    save_scenario(builtin_scenario(name), path);
    std::cout << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral laboratory for chemotaxis-consumption systems"};
  app.require_subcommand(1);
  app.fallthrough();  // allow --out after the subcommand name as well

  std::string out_flag;
  app.add_option("--out", out_flag,
                 "output directory (default: $KSLAB_OUT, then \"out\")");

  std::optional<int> n_override;
  std::optional<std::uint64_t> seed_override;

  // --- run ------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run one scenario and export its report");
  std::string run_ref;
  run->add_option("file", run_ref, "scenario JSON path or preset name")->required();
  run->add_option("--n", n_override, "override the grid resolution");
  run->add_option("--seed", seed_override, "override the random-data seed");

  // --- sweep ----------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "run every *.json scenario in a directory");
  std::string sweep_dir;
  int parallelism = 0;
  sw->add_option("dir", sweep_dir, "directory of scenario JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  sw->add_option("--parallel", parallelism, "worker threads (default: hardware)");
  sw->add_option("--n", n_override, "override the grid resolution");
  sw->add_option("--seed", seed_override, "override the random-data seed");

  // --- check ----------------------------------------------------------------
  auto* check = app.add_subcommand(
      "check", "validate a scenario and audit its initial-data hypotheses");
  std::string check_ref;
  check->add_option("file", check_ref, "scenario JSON path or preset name")->required();
  check->add_option("--n", n_override, "override the grid resolution");
  check->add_option("--seed", seed_override, "override the random-data seed");

  // --- gns ------------------------------------------------------------------
  auto* gns = app.add_subcommand(
      "gns", "survey sharpened interpolation constants over random fields");
  std::string gns_table;
  int gns_dim = 1, gns_n = 256, gns_samples = 300;
  std::uint64_t gns_seed = 1;
  gns->add_option("--table", gns_table, "table file (default: <out>/gns_constants.txt)");
  gns->add_option("--dim", gns_dim, "domain dimension")->check(CLI::Range(1, 2));
  gns->add_option("--n", gns_n, "grid resolution");
  gns->add_option("--samples", gns_samples, "number of random fields");
  gns->add_option("--seed", gns_seed, "generator seed");

  // --- linear ---------------------------------------------------------------
  auto* lin = app.add_subcommand(
      "linear", "per-mode amplification of the linearized systems");
  std::string lin_csv, lin_kind = "all";
  int lin_kmin = 1, lin_kmax = 16;
  double lin_T = 0.5, lin_dt = 0.0;
  lin->add_option("--kind", lin_kind,
                  "ks_wellposed | ks_illposed_c | ks_illposed_rho | ksf1d | "
                  "ksf1d_good | all");
  lin->add_option("--k-min", lin_kmin, "smallest wavenumber");
  lin->add_option("--k-max", lin_kmax, "largest wavenumber");
  lin->add_option("--T", lin_T, "time horizon")->check(CLI::PositiveNumber);
  lin->add_option("--dt", lin_dt, "RK4 step (0: resolution rule)");
  lin->add_option("--file", lin_csv, "CSV file (default: <out>/linear_modes.csv)");

  // --- ode ------------------------------------------------------------------
  auto* ode = app.add_subcommand(
      "ode", "blow-up time of the vanishing-point reference system");
  std::string ode_kind = "scalar", ode_csv;
  double ode_C0 = 0.2, ode_R0 = 0.2, ode_k1 = 1.0, ode_chi1 = 1.0, ode_rtol = 1e-12;
  int ode_d = 2;
  ode->add_option("--kind", ode_kind, "scalar | scalar-general | multi-d");
  ode->add_option("--C0", ode_C0, "initial chemical concavity at the vanishing point");
  ode->add_option("--R0", ode_R0, "initial density flatness at the vanishing point");
  ode->add_option("--d", ode_d, "dimension (multi-d)")->check(CLI::Range(1, 2));
  ode->add_option("--k1", ode_k1, "consumption law at c = 1 (scalar-general)");
  ode->add_option("--chi1", ode_chi1, "sensitivity at c = 1 (scalar-general)");
  ode->add_option("--rtol", ode_rtol, "relative tolerance");
  ode->add_option("--csv", ode_csv, "also write the comparison row to this CSV");

  // --- presets ---------------------------------------------------------------
  auto* pre = app.add_subcommand("presets", "list built-in scenarios or write them");
  std::string presets_dir;
  pre->add_option("--dir", presets_dir, "write <name>.json files into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(run_ref, out_flag, n_override, seed_override);
    if (*sw) return cmd_sweep(sweep_dir, out_flag, parallelism, n_override, seed_override);
    if (*check) return cmd_check(check_ref, n_override, seed_override);
    if (*gns) return cmd_gns(out_flag, gns_table, gns_dim, gns_n, gns_samples, gns_seed);
    if (*lin) return cmd_linear(out_flag, lin_csv, lin_kind, lin_kmin, lin_kmax, lin_T, lin_dt);
    if (*ode) return cmd_ode(ode_kind, ode_C0, ode_R0, ode_d, ode_k1, ode_chi1,
                             ode_rtol, ode_csv);
    if (*pre) return cmd_presets(presets_dir);
  } catch (const std::exception& e) {
    std::cerr << "kslab: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}