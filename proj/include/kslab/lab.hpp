#pragma once

// Scenario ingestion, run orchestration, persistence, sweeps, and export.
//
// A Scenario bundles everything a run needs: the grid, the model and stepper
// configuration, a named initial-data generator with its parameters, the
// diagnostics selection, and the run controls (end time, record cadence,
// abort threshold). Scenarios are read from and written to JSON; the
// canonical serialization (every key emitted, keys sorted) is hashed into a
// short config id so reports can be traced back to the exact configuration.
//
// run_scenario advances the state with CFL-adaptive steps that land exactly
// on the record times, collects a diagnostics record at every landing, and
// terminates with a structured reason: the end time was reached, the blow-up
// monitor crossed its threshold, a structural invariant failed (negative
// density/chemical beyond tolerance, velocity divergence), or the state
// stopped being finite. Anticipated singularities terminate the run, they
// never crash it. Once the monitor exceeds half the abort threshold every
// step is recorded, so the pre-blow-up window is densely sampled for the
// 1/C fit.
//
// Initial data is audited at run start against the structural hypotheses the
// analysis rests on (positivity, quadratic vanishing structure, ratio
// comparability); violations do not block the run but tag the
// report as hypothesis-violating, which is exactly what the instability
// demonstrations want.
//
// sweep runs a list of scenarios on a small thread pool. Each run is
// single-threaded and independent; reports land in the slot of their
// scenario, so the output order never depends on scheduling, and a failing
// scenario is isolated into an error report instead of aborting the sweep.
// Exports are plain files: a CSV of the record series at 17 significant
// digits, a JSON metadata document embedding the full scenario, and optional
// binary field snapshots (header: dim, n, components as little-endian int32,
// then the samples as little-endian 64-bit floats).

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kslab/diagnostics.hpp"
#include "kslab/models.hpp"
#include "kslab/timestep.hpp"

namespace kslab {

enum class InitialKind {
  constants,            ///< rho = rho0, c = c0
  trig,                 ///< mean + amp cos(x - phase) (times cos(y - phase) in 2D)
  quadratic_vanishing,  ///< rho = 2 R0 sum_i (1 - cos(x_i - x0_i)), c = c_base - 2 C0 sum_i (...)
  ratio_matched,        ///< c trigonometric, rho = amplitude * c^delta
  random_smooth,        ///< seeded trigonometric series shifted to a positive floor
};
std::string to_string(InitialKind kind);
InitialKind parse_initial_kind(const std::string& name);

enum class VelocityKind {
  none,               ///< zero velocity
  taylor_green,       ///< amp (sin kx cos ky, -cos kx sin ky), divergence-free
  random_solenoidal,  ///< perpendicular gradient of a seeded stream function
};
std::string to_string(VelocityKind kind);
VelocityKind parse_velocity_kind(const std::string& name);

/// Parameters of the named generators; only the block of the selected kind
/// is consulted. The velocity block applies whenever the model includes the
/// fluid (in 1D only `none` is meaningful: solenoidal means constant).
struct InitialSpec {
  InitialKind kind = InitialKind::constants;

  // constants
  double rho0 = 1.0;
  double c0 = 1.0;

  // trig
  double rho_mean = 1.0, rho_amp = 0.25;
  double c_mean = 1.0, c_amp = 0.25;
  std::array<double, 2> rho_phase{0.0, 0.0};
  std::array<double, 2> c_phase{0.0, 0.0};

  // quadratic_vanishing
  double C0 = 0.2, R0 = 0.2, c_base = 1.0;
  std::array<double, 2> x0{0.0, 0.0};

  // ratio_matched (reuses c_mean / c_amp / c_phase for the chemical)
  double amplitude = 1.0, delta = 1.0;

  // random_smooth
  std::uint64_t seed = 1;
  double rho_floor = 0.5, c_floor = 0.5;
  int degree = 0;  ///< trigonometric degree; 0 selects n/8

  // velocity (fluid runs)
  VelocityKind velocity = VelocityKind::none;
  double vel_amplitude = 0.0;
  std::uint64_t vel_seed = 2;
};

/// Buoyancy potential phi = amplitude * cos(k1 (m . x) + phase) with k1 the
/// base wavenumber 2 pi / length; materialized onto the grid at run start.
struct PhiSpec {
  bool enabled = false;
  std::array<int, 2> mode{0, 1};
  double amplitude = 0.0;
  double phase = 0.0;
};

struct RunConfig {
  double t_end = 1.0;
  double record_dt = 0.01;
  double abort_monitor = 1e6;   ///< blow-up threshold on the monitor
  double snapshot_dt = 0.0;     ///< in-memory state snapshots cadence; 0 disables
  long max_steps = 10'000'000;  ///< safety valve; exceeding it throws
  int fit_window = 40;          ///< trailing samples entering the 1/C fit
};

struct OutputConfig {
  std::string dir;         ///< output directory; empty defers to the caller
  bool snapshots = false;  ///< write binary field snapshots on export
};

struct Scenario {
  std::string name;
  int n = 128;
  double length = 6.283185307179586476925287;  // 2 pi
  ModelConfig model;  ///< phi is carried separately as parameters, see PhiSpec
  PhiSpec phi;
  StepperConfig stepper;
  InitialSpec initial;
  DiagnosticsConfig diagnostics;
  RunConfig run;
  OutputConfig output;
};

/// Canonical serialization: every key is emitted (defaults included) with
/// sorted keys, so equal configurations serialize identically.
nlohmann::json scenario_to_json(const Scenario& sc);
/// Strict parse: unknown keys anywhere are rejected with their path.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& sc, const std::filesystem::path& path);

/// FNV-1a 64-bit hash of the canonical serialization, 16 hex digits.
std::string config_hash(const Scenario& sc);

/// Model configuration with the buoyancy potential materialized on the grid.
ModelConfig model_config(const Scenario& sc);

/// Builds the t = 0 state from the generator parameters. Throws
/// std::invalid_argument for fatal configuration issues (wrong dimension,
/// negative viscosity, mismatched potential).
State initial_state(const Scenario& sc);

/// Load-time hypothesis audit: structural configuration hypotheses
/// (sensitivity matrix condition, coefficient positivity, consumption sign)
/// plus the initial-data hypotheses of the declared generator (strict
/// positivity, quadratic vanishing structure, ratio comparability,
/// solenoidal velocity). Violations tag the run instead of blocking it.
struct HypothesisReport {
  std::vector<std::string> violations;
  bool violating() const { return !violations.empty(); }
};
HypothesisReport check_hypotheses(const Scenario& sc, const State& s0);

enum class Termination {
  t_end,                ///< reached the configured end time
  blowup_threshold,     ///< blow-up monitor crossed run.abort_monitor
  invariant_violation,  ///< negativity or divergence beyond tolerance
  nonfinite,            ///< NaN or infinity entered the state
  error,                ///< scenario failed outside the anticipated reasons (sweep isolation)
};
std::string to_string(Termination t);

struct RunReport {
  Scenario scenario;
  std::string config_hash;
  double final_t = 0.0;
  Termination termination = Termination::error;
  std::string detail;  ///< human-readable amplification of the reason
  HypothesisReport hypotheses;
  std::vector<DiagnosticsRecord> records;
  std::vector<State> snapshots;  ///< states at the snapshot cadence (+ final state)
  std::optional<BlowupFit> fit;  ///< 1/C fit when the tracked C series supports one
  State final_state;
  long steps = 0;
};

/// Runs one scenario to termination. Throws std::invalid_argument for
/// malformed scenarios (non-positive times or cadences) and
/// std::runtime_error when the step-limit safety valve trips; anticipated
/// singularities come back as structured termination reasons.
RunReport run_scenario(const Scenario& sc);

/// Runs every scenario on `parallelism` worker threads. Reports are in
/// scenario order regardless of scheduling; a scenario whose run throws is
/// isolated into a Termination::error report carrying the message.
std::vector<RunReport> sweep(const std::vector<Scenario>& scenarios, int parallelism);

/// Column names of the record CSV for this scenario's diagnostics selection.
std::vector<std::string> csv_columns(const Scenario& sc);
/// One header line, then one row per record, every value at 17 significant
/// digits (exact double round-trip).
void write_records_csv(std::ostream& os, const RunReport& report);

/// Writes <out_root>/<scenario name>/records.csv and metadata.json, plus
/// final_*.bin (and snapshot_KKK_*.bin) field snapshots when the scenario
/// asks for them. Returns the report directory. I/O failures carry the path.
std::filesystem::path export_report(const RunReport& report,
                                    const std::filesystem::path& out_root);

/// Flat binary field snapshot: int32 dim, n, components (little-endian),
/// then components * points doubles (little-endian, component-major row-major
/// storage order). The grid edge length is not part of the format; reading
/// restores it from the argument.
void write_field_snapshot(const std::filesystem::path& path, const Field& f);
Field read_field_snapshot(const std::filesystem::path& path,
                          double length = 6.283185307179586476925287);

/// Preset scenarios exercised by the test and acceptance suites; the JSON
/// files shipped under scenarios/ are generated from these.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

}  // namespace kslab
