#include "kslab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "kslab/inequalities.hpp"
#include "kslab/rng.hpp"

namespace kslab {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

std::string coeff_name(CoeffKind k) {
  switch (k) {
    case CoeffKind::constant: return "constant";
    case CoeffKind::power: return "power";
    case CoeffKind::smooth_of_power: return "smooth_of_power";
  }
  return "constant";
}

CoeffKind parse_coeff_kind(const std::string& name) {
  if (name == "constant") return CoeffKind::constant;
  if (name == "power") return CoeffKind::power;
  if (name == "smooth_of_power") return CoeffKind::smooth_of_power;
  throw std::invalid_argument("unknown coefficient kind: " + name);
}

std::string scheme_name(Scheme s) { return s == Scheme::imex ? "imex" : "rk4"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "rk4") return Scheme::rk4;
  if (name == "imex") return Scheme::imex;
  throw std::invalid_argument("unknown scheme: " + name);
}

// ---------------------------------------------------------------------------
// Strict JSON helpers
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("scenario: " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(path, "unknown key \"" + it.key() + "\"");
  }
}

double get_num(const json& j, const char* key, double dflt, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

long get_long(const json& j, const char* key, long dflt, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  return it->get<long>();
}

int get_int(const json& j, const char* key, int dflt, const std::string& path) {
  return static_cast<int>(get_long(j, key, dflt, path));
}

std::uint64_t get_uint(const json& j, const char* key, std::uint64_t dflt,
                       const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  return it->get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, bool dflt, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string get_str(const json& j, const char* key, const std::string& dflt,
                    const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

std::array<double, 2> get_pair(const json& j, const char* key,
                               std::array<double, 2> dflt, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_array() || it->empty() || it->size() > 2)
    fail(path + "." + key, "expected an array of one or two numbers");
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number()) fail(path + "." + key, "expected numbers");
    out[i] = (*it)[i].get<double>();
  }
  return out;
}

CoefficientSpec coeff_from_json(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "value", "gamma", "offset", "scale"});
  CoefficientSpec c;
  c.kind = parse_coeff_kind(get_str(j, "kind", "constant", path));
  c.value = get_num(j, "value", c.value, path);
  c.gamma = get_num(j, "gamma", c.gamma, path);
  c.offset = get_num(j, "offset", c.offset, path);
  c.scale = get_num(j, "scale", c.scale, path);
  return c;
}

json coeff_to_json(const CoefficientSpec& c) {
  return json{{"kind", coeff_name(c.kind)},
              {"value", c.value},
              {"gamma", c.gamma},
              {"offset", c.offset},
              {"scale", c.scale}};
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Enum round-trips
// ---------------------------------------------------------------------------

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::constants: return "constants";
    case InitialKind::trig: return "trig";
    case InitialKind::quadratic_vanishing: return "quadratic_vanishing";
    case InitialKind::ratio_matched: return "ratio_matched";
    case InitialKind::random_smooth: return "random_smooth";
  }
  return "constants";
}

InitialKind parse_initial_kind(const std::string& name) {
  if (name == "constants") return InitialKind::constants;
  if (name == "trig") return InitialKind::trig;
  if (name == "quadratic_vanishing") return InitialKind::quadratic_vanishing;
  if (name == "ratio_matched") return InitialKind::ratio_matched;
  if (name == "random_smooth") return InitialKind::random_smooth;
  throw std::invalid_argument("unknown initial data kind: " + name);
}

std::string to_string(VelocityKind kind) {
  switch (kind) {
    case VelocityKind::none: return "none";
    case VelocityKind::taylor_green: return "taylor_green";
    case VelocityKind::random_solenoidal: return "random_solenoidal";
  }
  return "none";
}

VelocityKind parse_velocity_kind(const std::string& name) {
  if (name == "none") return VelocityKind::none;
  if (name == "taylor_green") return VelocityKind::taylor_green;
  if (name == "random_solenoidal") return VelocityKind::random_solenoidal;
  throw std::invalid_argument("unknown velocity kind: " + name);
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::t_end: return "t_end";
    case Termination::blowup_threshold: return "blow-up threshold";
    case Termination::invariant_violation: return "invariant violation";
    case Termination::nonfinite: return "nonfinite";
    case Termination::error: return "error";
  }
  return "error";
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["grid"] = json{{"n", sc.n}, {"length", sc.length}};

  json m;
  m["dim"] = sc.model.dim;
  m["D_rho"] = sc.model.D_rho;
  m["D_c"] = sc.model.D_c;
  m["D_u"] = sc.model.D_u;
  m["chi"] = coeff_to_json(sc.model.chi);
  m["k"] = coeff_to_json(sc.model.k);
  m["S"] = json::array({json::array({sc.model.S.s[0][0], sc.model.S.s[0][1]}),
                        json::array({sc.model.S.s[1][0], sc.model.S.s[1][1]})});
  m["include_fluid"] = sc.model.include_fluid;
  m["dealias"] = sc.model.dealias_products;
  m["eps_floor"] = sc.model.eps_floor;
  m["consumption_sign"] = sc.model.consumption_sign;
  if (sc.phi.enabled)
    m["phi"] = json{{"mode", json::array({sc.phi.mode[0], sc.phi.mode[1]})},
                    {"amplitude", sc.phi.amplitude},
                    {"phase", sc.phi.phase}};
  else
    m["phi"] = nullptr;
  j["model"] = m;

  j["stepper"] = json{{"scheme", scheme_name(sc.stepper.scheme)},
                      {"cfl", sc.stepper.cfl_number},
                      {"dt_min", sc.stepper.dt_min},
                      {"dt_max", sc.stepper.dt_max}};

  json ini;
  ini["kind"] = to_string(sc.initial.kind);
  switch (sc.initial.kind) {
    case InitialKind::constants:
      ini["rho"] = sc.initial.rho0;
      ini["c"] = sc.initial.c0;
      break;
    case InitialKind::trig:
      ini["rho_mean"] = sc.initial.rho_mean;
      ini["rho_amp"] = sc.initial.rho_amp;
      ini["rho_phase"] = json::array({sc.initial.rho_phase[0], sc.initial.rho_phase[1]});
      ini["c_mean"] = sc.initial.c_mean;
      ini["c_amp"] = sc.initial.c_amp;
      ini["c_phase"] = json::array({sc.initial.c_phase[0], sc.initial.c_phase[1]});
      break;
    case InitialKind::quadratic_vanishing:
      ini["C0"] = sc.initial.C0;
      ini["R0"] = sc.initial.R0;
      ini["c_base"] = sc.initial.c_base;
      ini["x0"] = json::array({sc.initial.x0[0], sc.initial.x0[1]});
      break;
    case InitialKind::ratio_matched:
      ini["amplitude"] = sc.initial.amplitude;
      ini["delta"] = sc.initial.delta;
      ini["c_mean"] = sc.initial.c_mean;
      ini["c_amp"] = sc.initial.c_amp;
      ini["c_phase"] = json::array({sc.initial.c_phase[0], sc.initial.c_phase[1]});
      break;
    case InitialKind::random_smooth:
      ini["seed"] = sc.initial.seed;
      ini["rho_floor"] = sc.initial.rho_floor;
      ini["c_floor"] = sc.initial.c_floor;
      ini["degree"] = sc.initial.degree;
      break;
  }
  ini["velocity"] = json{{"kind", to_string(sc.initial.velocity)},
                         {"amplitude", sc.initial.vel_amplitude},
                         {"seed", sc.initial.vel_seed}};
  j["initial"] = ini;

  json d;
  d["energy_orders"] = sc.diagnostics.energy_orders;
  d["z_order"] = sc.diagnostics.z_order;
  d["track_z"] = sc.diagnostics.track_z;
  d["x_m"] = sc.diagnostics.x_m;
  d["x_gamma"] = sc.diagnostics.x_gamma;
  d["x_eps"] = sc.diagnostics.x_eps;
  d["track_x"] = sc.diagnostics.track_x;
  d["ratio_delta"] = sc.diagnostics.ratio_delta;
  d["track_ratio"] = sc.diagnostics.track_ratio;
  d["y_order"] = sc.diagnostics.y_order;
  d["taylor_x0"] = json::array({sc.diagnostics.taylor_x0[0], sc.diagnostics.taylor_x0[1]});
  d["track_taylor"] = sc.diagnostics.track_taylor;
  d["eps_floor"] = sc.diagnostics.eps_floor;
  j["diagnostics"] = d;

  j["run"] = json{{"t_end", sc.run.t_end},
                  {"record_dt", sc.run.record_dt},
                  {"abort_monitor", sc.run.abort_monitor},
                  {"snapshot_dt", sc.run.snapshot_dt},
                  {"max_steps", sc.run.max_steps},
                  {"fit_window", sc.run.fit_window}};

  j["output"] = json{{"dir", sc.output.dir}, {"snapshots", sc.output.snapshots}};
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  check_keys(j, "",
             {"name", "grid", "model", "stepper", "initial", "diagnostics", "run", "output"});
  Scenario sc;
  if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
    fail("name", "a non-empty scenario name is required");
  sc.name = j["name"].get<std::string>();

  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"n", "length"});
    sc.n = get_int(g, "n", sc.n, "grid");
    sc.length = get_num(g, "length", sc.length, "grid");
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, "model",
               {"dim", "D_rho", "D_c", "D_u", "chi", "k", "S", "include_fluid", "phi",
                "dealias", "eps_floor", "consumption_sign"});
    sc.model.dim = get_int(m, "dim", sc.model.dim, "model");
    sc.model.D_rho = get_num(m, "D_rho", sc.model.D_rho, "model");
    sc.model.D_c = get_num(m, "D_c", sc.model.D_c, "model");
    sc.model.D_u = get_num(m, "D_u", sc.model.D_u, "model");
    if (m.contains("chi")) sc.model.chi = coeff_from_json(m["chi"], "model.chi");
    if (m.contains("k")) sc.model.k = coeff_from_json(m["k"], "model.k");
    if (m.contains("S")) {
      const json& S = m["S"];
      if (!S.is_array() || S.empty() || S.size() > 2) fail("model.S", "expected 1 or 2 rows");
      for (std::size_t r = 0; r < S.size(); ++r) {
        if (!S[r].is_array() || S[r].empty() || S[r].size() > 2)
          fail("model.S", "expected rows of 1 or 2 numbers");
        for (std::size_t cidx = 0; cidx < S[r].size(); ++cidx) {
          if (!S[r][cidx].is_number()) fail("model.S", "expected numbers");
          sc.model.S.s[r][cidx] = S[r][cidx].get<double>();
        }
      }
    }
    sc.model.include_fluid = get_bool(m, "include_fluid", sc.model.include_fluid, "model");
    sc.model.dealias_products = get_bool(m, "dealias", sc.model.dealias_products, "model");
    sc.model.eps_floor = get_num(m, "eps_floor", sc.model.eps_floor, "model");
    sc.model.consumption_sign =
        get_num(m, "consumption_sign", sc.model.consumption_sign, "model");
    if (m.contains("phi") && !m["phi"].is_null()) {
      const json& p = m["phi"];
      check_keys(p, "model.phi", {"mode", "amplitude", "phase"});
      sc.phi.enabled = true;
      const std::array<double, 2> mode =
          get_pair(p, "mode", {static_cast<double>(sc.phi.mode[0]),
                               static_cast<double>(sc.phi.mode[1])},
                   "model.phi");
      sc.phi.mode = {static_cast<int>(mode[0]), static_cast<int>(mode[1])};
      sc.phi.amplitude = get_num(p, "amplitude", sc.phi.amplitude, "model.phi");
      sc.phi.phase = get_num(p, "phase", sc.phi.phase, "model.phi");
    }
  }

  if (j.contains("stepper")) {
    const json& s = j["stepper"];
    check_keys(s, "stepper", {"scheme", "cfl", "dt_min", "dt_max"});
    sc.stepper.scheme = parse_scheme(get_str(s, "scheme", scheme_name(sc.stepper.scheme), "stepper"));
    sc.stepper.cfl_number = get_num(s, "cfl", sc.stepper.cfl_number, "stepper");
    sc.stepper.dt_min = get_num(s, "dt_min", sc.stepper.dt_min, "stepper");
    sc.stepper.dt_max = get_num(s, "dt_max", sc.stepper.dt_max, "stepper");
  }

  if (j.contains("initial")) {
    const json& i = j["initial"];
    sc.initial.kind = parse_initial_kind(get_str(i, "kind", "constants", "initial"));
    switch (sc.initial.kind) {
      case InitialKind::constants:
        check_keys(i, "initial", {"kind", "rho", "c", "velocity"});
        sc.initial.rho0 = get_num(i, "rho", sc.initial.rho0, "initial");
        sc.initial.c0 = get_num(i, "c", sc.initial.c0, "initial");
        break;
      case InitialKind::trig:
        check_keys(i, "initial",
                   {"kind", "rho_mean", "rho_amp", "rho_phase", "c_mean", "c_amp", "c_phase",
                    "velocity"});
        sc.initial.rho_mean = get_num(i, "rho_mean", sc.initial.rho_mean, "initial");
        sc.initial.rho_amp = get_num(i, "rho_amp", sc.initial.rho_amp, "initial");
        sc.initial.rho_phase = get_pair(i, "rho_phase", sc.initial.rho_phase, "initial");
        sc.initial.c_mean = get_num(i, "c_mean", sc.initial.c_mean, "initial");
        sc.initial.c_amp = get_num(i, "c_amp", sc.initial.c_amp, "initial");
        sc.initial.c_phase = get_pair(i, "c_phase", sc.initial.c_phase, "initial");
        break;
      case InitialKind::quadratic_vanishing:
        check_keys(i, "initial", {"kind", "C0", "R0", "c_base", "x0", "velocity"});
        sc.initial.C0 = get_num(i, "C0", sc.initial.C0, "initial");
        sc.initial.R0 = get_num(i, "R0", sc.initial.R0, "initial");
        sc.initial.c_base = get_num(i, "c_base", sc.initial.c_base, "initial");
        sc.initial.x0 = get_pair(i, "x0", sc.initial.x0, "initial");
        break;
      case InitialKind::ratio_matched:
        check_keys(i, "initial",
                   {"kind", "amplitude", "delta", "c_mean", "c_amp", "c_phase", "velocity"});
        sc.initial.amplitude = get_num(i, "amplitude", sc.initial.amplitude, "initial");
        sc.initial.delta = get_num(i, "delta", sc.initial.delta, "initial");
        sc.initial.c_mean = get_num(i, "c_mean", sc.initial.c_mean, "initial");
        sc.initial.c_amp = get_num(i, "c_amp", sc.initial.c_amp, "initial");
        sc.initial.c_phase = get_pair(i, "c_phase", sc.initial.c_phase, "initial");
        break;
      case InitialKind::random_smooth:
        check_keys(i, "initial", {"kind", "seed", "rho_floor", "c_floor", "degree", "velocity"});
        sc.initial.seed = get_uint(i, "seed", sc.initial.seed, "initial");
        sc.initial.rho_floor = get_num(i, "rho_floor", sc.initial.rho_floor, "initial");
        sc.initial.c_floor = get_num(i, "c_floor", sc.initial.c_floor, "initial");
        sc.initial.degree = get_int(i, "degree", sc.initial.degree, "initial");
        break;
    }
    if (i.contains("velocity")) {
      const json& v = i["velocity"];
      check_keys(v, "initial.velocity", {"kind", "amplitude", "seed"});
      sc.initial.velocity =
          parse_velocity_kind(get_str(v, "kind", "none", "initial.velocity"));
      sc.initial.vel_amplitude =
          get_num(v, "amplitude", sc.initial.vel_amplitude, "initial.velocity");
      sc.initial.vel_seed = get_uint(v, "seed", sc.initial.vel_seed, "initial.velocity");
    }
  }

  if (j.contains("diagnostics")) {
    const json& d = j["diagnostics"];
    check_keys(d, "diagnostics",
               {"energy_orders", "z_order", "track_z", "x_m", "x_gamma", "x_eps", "track_x",
                "ratio_delta", "track_ratio", "y_order", "taylor_x0", "track_taylor",
                "eps_floor"});
    if (d.contains("energy_orders")) {
      if (!d["energy_orders"].is_array()) fail("diagnostics.energy_orders", "expected an array");
      sc.diagnostics.energy_orders.clear();
      for (const auto& e : d["energy_orders"]) {
        if (!e.is_number_integer()) fail("diagnostics.energy_orders", "expected integers");
        sc.diagnostics.energy_orders.push_back(e.get<int>());
      }
    }
    sc.diagnostics.z_order = get_int(d, "z_order", sc.diagnostics.z_order, "diagnostics");
    sc.diagnostics.track_z = get_bool(d, "track_z", sc.diagnostics.track_z, "diagnostics");
    sc.diagnostics.x_m = get_int(d, "x_m", sc.diagnostics.x_m, "diagnostics");
    sc.diagnostics.x_gamma = get_num(d, "x_gamma", sc.diagnostics.x_gamma, "diagnostics");
    sc.diagnostics.x_eps = get_num(d, "x_eps", sc.diagnostics.x_eps, "diagnostics");
    sc.diagnostics.track_x = get_bool(d, "track_x", sc.diagnostics.track_x, "diagnostics");
    sc.diagnostics.ratio_delta =
        get_num(d, "ratio_delta", sc.diagnostics.ratio_delta, "diagnostics");
    sc.diagnostics.track_ratio =
        get_bool(d, "track_ratio", sc.diagnostics.track_ratio, "diagnostics");
    sc.diagnostics.y_order = get_int(d, "y_order", sc.diagnostics.y_order, "diagnostics");
    sc.diagnostics.taylor_x0 = get_pair(d, "taylor_x0", sc.diagnostics.taylor_x0, "diagnostics");
    sc.diagnostics.track_taylor =
        get_bool(d, "track_taylor", sc.diagnostics.track_taylor, "diagnostics");
    sc.diagnostics.eps_floor = get_num(d, "eps_floor", sc.diagnostics.eps_floor, "diagnostics");
  }

  if (j.contains("run")) {
    const json& r = j["run"];
    check_keys(r, "run",
               {"t_end", "record_dt", "abort_monitor", "snapshot_dt", "max_steps", "fit_window"});
    sc.run.t_end = get_num(r, "t_end", sc.run.t_end, "run");
    sc.run.record_dt = get_num(r, "record_dt", sc.run.record_dt, "run");
    sc.run.abort_monitor = get_num(r, "abort_monitor", sc.run.abort_monitor, "run");
    sc.run.snapshot_dt = get_num(r, "snapshot_dt", sc.run.snapshot_dt, "run");
    sc.run.max_steps = get_long(r, "max_steps", sc.run.max_steps, "run");
    sc.run.fit_window = get_int(r, "fit_window", sc.run.fit_window, "run");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"dir", "snapshots"});
    sc.output.dir = get_str(o, "dir", sc.output.dir, "output");
    sc.output.snapshots = get_bool(o, "snapshots", sc.output.snapshots, "output");
  }

  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open scenario file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("scenario " + path.string() + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument("scenario " + path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write scenario file " + path.string());
  os << scenario_to_json(sc).dump(2) << '\n';
  if (!os) throw std::runtime_error("failed writing scenario file " + path.string());
}

std::string config_hash(const Scenario& sc) {
  const std::string dump = scenario_to_json(sc).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : dump) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

ModelConfig model_config(const Scenario& sc) {
  ModelConfig cfg = sc.model;
  if (sc.phi.enabled) {
    const Grid g = make_grid(cfg.dim, sc.n, sc.length);
    const double k1 = kTwoPi / sc.length;
    const double m0 = static_cast<double>(sc.phi.mode[0]);
    const double m1 = static_cast<double>(sc.phi.mode[1]);
    cfg.phi = sample(g, [&](const std::array<double, 2>& x) {
      return sc.phi.amplitude * std::cos(k1 * (m0 * x[0] + m1 * x[1]) + sc.phi.phase);
    });
  }
  return cfg;
}

State initial_state(const Scenario& sc) {
  const ModelConfig cfg = model_config(sc);
  for (const ConfigIssue& issue : validate_config(cfg))
    if (issue.fatal) throw std::invalid_argument("scenario " + sc.name + ": " + issue.message);
  const Grid g = make_grid(cfg.dim, sc.n, sc.length);
  const double k1 = kTwoPi / sc.length;
  const InitialSpec& in = sc.initial;

  State s;
  s.t = 0.0;
  switch (in.kind) {
    case InitialKind::constants:
      s.rho = make_field(g, 1, in.rho0);
      s.c = make_field(g, 1, in.c0);
      break;
    case InitialKind::trig: {
      auto trig = [&](double mean, double amp, const std::array<double, 2>& phase,
                      const std::array<double, 2>& x) {
        double v = std::cos(k1 * x[0] - phase[0]);
        if (g.dim == 2) v *= std::cos(k1 * x[1] - phase[1]);
        return mean + amp * v;
      };
      s.rho = sample(g, [&](const std::array<double, 2>& x) {
        return trig(in.rho_mean, in.rho_amp, in.rho_phase, x);
      });
      s.c = sample(g, [&](const std::array<double, 2>& x) {
        return trig(in.c_mean, in.c_amp, in.c_phase, x);
      });
      break;
    }
    case InitialKind::quadratic_vanishing: {
      auto bump = [&](const std::array<double, 2>& x) {
        double v = 1.0 - std::cos(k1 * (x[0] - in.x0[0]));
        if (g.dim == 2) v += 1.0 - std::cos(k1 * (x[1] - in.x0[1]));
        return v;
      };
      s.rho = sample(g, [&](const std::array<double, 2>& x) { return 2.0 * in.R0 * bump(x); });
      s.c = sample(g,
                   [&](const std::array<double, 2>& x) { return in.c_base - 2.0 * in.C0 * bump(x); });
      break;
    }
    case InitialKind::ratio_matched: {
      s.c = sample(g, [&](const std::array<double, 2>& x) {
        double v = std::cos(k1 * x[0] - in.c_phase[0]);
        if (g.dim == 2) v *= std::cos(k1 * x[1] - in.c_phase[1]);
        return in.c_mean + in.c_amp * v;
      });
      s.rho = make_field(g);
      for (std::size_t i = 0; i < g.points(); ++i)
        s.rho.values[i] =
            in.amplitude * std::pow(std::max(s.c.values[i], 0.0), in.delta);
      break;
    }
    case InitialKind::random_smooth: {
      const int degree = in.degree > 0 ? in.degree : std::max(1, sc.n / 8);
      s.rho = random_positive_trig(g, degree, in.rho_floor, in.seed);
      s.c = random_positive_trig(g, degree, in.c_floor, in.seed + 1);
      break;
    }
  }

  if (cfg.include_fluid) {
    Field u = make_field(g, g.dim);
    switch (in.velocity) {
      case VelocityKind::none:
        break;
      case VelocityKind::taylor_green: {
        if (g.dim != 2)
          throw std::invalid_argument("taylor_green velocity requires a 2D scenario");
        const Field stream = sample(g, [&](const std::array<double, 2>& x) {
          return std::sin(k1 * x[0]) * std::cos(k1 * x[1]);
        });
        for (std::size_t i = 0; i < g.points(); ++i) u.at(0, i) = in.vel_amplitude * stream.values[i];
        const Field other = sample(g, [&](const std::array<double, 2>& x) {
          return -std::cos(k1 * x[0]) * std::sin(k1 * x[1]);
        });
        for (std::size_t i = 0; i < g.points(); ++i) u.at(1, i) = in.vel_amplitude * other.values[i];
        break;
      }
      case VelocityKind::random_solenoidal: {
        if (g.dim == 1) {
          // The only divergence-free 1D fields are constants.
          for (std::size_t i = 0; i < g.points(); ++i) u.at(0, i) = in.vel_amplitude;
          break;
        }
        // Seeded stream function, then u = (d_y psi, -d_x psi): exactly
        // divergence-free in spectral arithmetic.
        DetRng rng(in.vel_seed);
        struct Mode {
          double mx, my, amp, phase;
        };
        std::vector<Mode> modes;
        for (int jm = 0; jm < 6; ++jm) {
          Mode mo{};
          do {
            mo.mx = std::floor(rng.uniform() * 4.0);
            mo.my = std::floor(rng.uniform() * 4.0);
          } while (mo.mx == 0.0 && mo.my == 0.0);
          mo.amp = rng.uniform(-1.0, 1.0) / (1.0 + mo.mx + mo.my);
          mo.phase = rng.uniform(0.0, kTwoPi);
          modes.push_back(mo);
        }
        const Field psi = sample(g, [&](const std::array<double, 2>& x) {
          double v = 0.0;
          for (const Mode& mo : modes)
            v += mo.amp * std::cos(k1 * (mo.mx * x[0] + mo.my * x[1]) + mo.phase);
          return v;
        });
        const Field dpsi = gradient(psi);
        double sup = 0.0;
        for (std::size_t i = 0; i < g.points(); ++i)
          sup = std::max(sup, std::hypot(dpsi.at(0, i), dpsi.at(1, i)));
        const double scale = sup > 0.0 ? in.vel_amplitude / sup : 0.0;
        for (std::size_t i = 0; i < g.points(); ++i) {
          u.at(0, i) = scale * dpsi.at(1, i);
          u.at(1, i) = -scale * dpsi.at(0, i);
        }
        break;
      }
    }
    s.u = std::move(u);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Hypothesis audit
// ---------------------------------------------------------------------------

HypothesisReport check_hypotheses(const Scenario& sc, const State& s0) {
  HypothesisReport rep;
  auto tag = [&rep](const std::string& t) {
    if (std::find(rep.violations.begin(), rep.violations.end(), t) == rep.violations.end())
      rep.violations.push_back(t);
  };

  for (const ConfigIssue& issue : validate_config(model_config(sc)))
    if (!issue.fatal) tag(issue.code);

  const double inf_c = reduce(s0.c, Reduce::inf).value;
  if (inf_c <= 0.0) tag("chemical-not-positive");

  const double inf_rho = reduce(s0.rho, Reduce::inf).value;
  const double sup_rho = reduce(s0.rho, Reduce::sup).value;
  switch (sc.initial.kind) {
    case InitialKind::constants:
    case InitialKind::trig:
    case InitialKind::ratio_matched:
    case InitialKind::random_smooth:
      if (inf_rho <= 0.0) tag("density-not-positive");
      break;
    case InitialKind::quadratic_vanishing: {
      if (inf_rho < -1e-12 * std::max(1.0, sup_rho)) tag("density-negative");
      const TaylorCoeffs tc = taylor_coeffs(s0, sc.initial.x0);
      if (std::abs(tc.rho0) > 1e-10 * std::max(1.0, sup_rho)) tag("vanishing-point-not-zero");
      for (int a = 0; a < s0.rho.grid.dim; ++a)
        if (tc.R[static_cast<std::size_t>(a)] <= 0.0) tag("vanishing-not-quadratic");
      break;
    }
  }

  if (sc.initial.kind == InitialKind::ratio_matched) {
    try {
      const RatioBounds rb = ratio_bounds(s0, sc.initial.delta, sc.diagnostics.eps_floor);
      if (!std::isfinite(rb.sup_rho_over_c_delta) || !std::isfinite(rb.sup_c_delta_over_rho) ||
          rb.sup_rho_over_c_delta <= 0.0 || rb.sup_c_delta_over_rho <= 0.0)
        tag("ratio-unbounded");
    } catch (const std::runtime_error&) {
      tag("ratio-unbounded");
    }
  }

  if (sc.model.include_fluid && s0.u) {
    double sup_u = 0.0;
    for (double v : s0.u->values) sup_u = std::max(sup_u, std::abs(v));
    const double div_sup = reduce(divergence(*s0.u), Reduce::sup_abs).value;
    if (div_sup > 1e-10 * std::max(1.0, sup_u)) tag("velocity-not-solenoidal");
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

RunReport run_scenario(const Scenario& sc) {
  if (!(sc.run.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(sc.run.record_dt > 0.0)) throw std::invalid_argument("record_dt must be positive");
  if (!(sc.run.abort_monitor > 0.0))
    throw std::invalid_argument("abort_monitor must be positive");
  if (sc.run.max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  if (sc.run.fit_window < 3) throw std::invalid_argument("fit_window must be at least 3");

  RunReport rep;
  rep.scenario = sc;
  rep.config_hash = kslab::config_hash(sc);

  const ModelConfig cfg = model_config(sc);
  State s = initial_state(sc);
  rep.hypotheses = check_hypotheses(sc, s);

  rep.records.push_back(collect(s, cfg, sc.diagnostics, 0.0));
  if (sc.run.snapshot_dt > 0.0) rep.snapshots.push_back(s);

  double next_record = sc.run.record_dt;
  double next_snapshot = sc.run.snapshot_dt;
  const double t_end = sc.run.t_end;
  std::optional<Termination> term;
  std::string detail;
  long steps = 0;

  while (!term) {
    if (s.t >= t_end - 1e-9 * std::max(1.0, t_end)) {
      term = Termination::t_end;
      detail = "reached the configured end time";
      break;
    }
    const CflResult cr = cfl_dt(s, cfg, sc.stepper);
    double dt = cr.dt;
    const double target = std::min(next_record, t_end);
    bool snap = false;
    if (s.t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - s.t;
      snap = true;
    }
    if (!(dt > 0.0)) {  // degenerate landing; take the raw CFL step instead
      dt = cr.dt;
      snap = false;
    }

    s = step(s, cfg, sc.stepper, dt);
    if (snap) s.t = target;  // absorb the final rounding of the landing step
    ++steps;

    if (has_nonfinite(s.rho) || has_nonfinite(s.c) || (s.u && has_nonfinite(*s.u))) {
      term = Termination::nonfinite;
      detail = "state left the finite range";
      break;
    }

    // Cheap per-step guards; the full record is collected only when kept.
    const double inf_rho = reduce(s.rho, Reduce::inf).value;
    const double inf_c = reduce(s.c, Reduce::inf).value;
    const double monitor = blowup_monitor(s);
    double div_sup = 0.0;
    if (cfg.include_fluid && s.u) div_sup = reduce(divergence(*s.u), Reduce::sup_abs).value;

    const bool violated = inf_rho < -1e-8 || inf_c < -1e-8 || div_sup > 1e-8;
    const bool threshold = monitor >= sc.run.abort_monitor;
    const bool dense = monitor >= 0.5 * sc.run.abort_monitor;
    const bool record_now = snap || dense || violated || threshold;

    if (record_now) rep.records.push_back(collect(s, cfg, sc.diagnostics, dt));
    if (snap && sc.run.snapshot_dt > 0.0 &&
        s.t >= next_snapshot - 1e-9 * std::max(1.0, next_snapshot)) {
      rep.snapshots.push_back(s);
      next_snapshot += sc.run.snapshot_dt;
    }
    if (snap && target == next_record) next_record += sc.run.record_dt;

    if (violated) {
      term = Termination::invariant_violation;
      detail = inf_rho < -1e-8 || inf_c < -1e-8
                   ? "negative density or chemical beyond tolerance"
                   : "velocity divergence beyond tolerance";
      break;
    }
    if (threshold) {
      term = Termination::blowup_threshold;
      detail = "blow-up monitor crossed the abort threshold";
      break;
    }
    if (steps >= sc.run.max_steps)
      throw std::runtime_error("step limit exceeded for scenario " + sc.name);
  }

  rep.final_t = s.t;
  rep.termination = *term;
  rep.detail = detail;
  rep.steps = steps;
  rep.final_state = s;

  if (sc.diagnostics.track_taylor && rep.records.size() >= 6) {
    std::vector<double> ts, Cs;
    ts.reserve(rep.records.size());
    Cs.reserve(rep.records.size());
    for (const DiagnosticsRecord& r : rep.records) {
      ts.push_back(r.t);
      Cs.push_back(r.taylor_C[0]);
    }
    const int window = std::min<int>(sc.run.fit_window, static_cast<int>(ts.size()));
    try {
      rep.fit = fit_blowup_rate(ts, Cs, window);
    } catch (const std::exception&) {
      rep.fit.reset();  // series does not support a blow-up fit; not an error
    }
  }
  return rep;
}

std::vector<RunReport> sweep(const std::vector<Scenario>& scenarios, int parallelism) {
  if (parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
  std::vector<RunReport> reports(scenarios.size());
  if (scenarios.empty()) return reports;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= scenarios.size()) return;
      try {
        reports[i] = run_scenario(scenarios[i]);
      } catch (const std::exception& e) {
        RunReport rep;
        rep.scenario = scenarios[i];
        rep.config_hash = kslab::config_hash(scenarios[i]);
        rep.termination = Termination::error;
        rep.detail = e.what();
        reports[i] = std::move(rep);
      }
    }
  };

  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(parallelism), scenarios.size());
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return reports;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

std::vector<std::string> csv_columns(const Scenario& sc) {
  const DiagnosticsConfig& dc = sc.diagnostics;
  std::vector<std::string> cols{
      "t", "dt", "mass", "sup_rho", "inf_rho", "sup_c", "inf_c", "inv_inf_rho", "inv_inf_c",
      "sup_u", "div_u_sup", "sup_f", "sup_grad_f", "sup_abs_lap_c", "sup_reaction",
      "sup_consumption_rate", "sup_drift_rho", "monitor", "spectral_tail"};
  for (int m : dc.energy_orders) cols.push_back("energy_m" + std::to_string(m));
  if (dc.track_z) {
    for (int jz = 0; jz <= dc.z_order; ++jz) cols.push_back("z_j" + std::to_string(jz));
    cols.push_back("z_total");
  }
  if (dc.track_x) {
    for (int p = 0; p <= dc.x_m; ++p) cols.push_back("x_part" + std::to_string(p));
    cols.push_back("x_total");
  }
  cols.push_back("y_rho");
  cols.push_back("y_f");
  if (dc.track_ratio) {
    cols.push_back("ratio_rho_over_c_delta");
    cols.push_back("ratio_c_delta_over_rho");
  }
  if (dc.track_taylor) {
    for (int a = 0; a < sc.model.dim; ++a) cols.push_back("taylor_C" + std::to_string(a));
    for (int a = 0; a < sc.model.dim; ++a) cols.push_back("taylor_R" + std::to_string(a));
    cols.push_back("c_at_x0");
    cols.push_back("rho_at_x0");
  }
  return cols;
}

void write_records_csv(std::ostream& os, const RunReport& report) {
  const Scenario& sc = report.scenario;
  const DiagnosticsConfig& dc = sc.diagnostics;
  const std::vector<std::string> cols = csv_columns(sc);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os << ',';
    os << cols[i];
  }
  os << '\n';

  auto vec_at = [](const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? v[i] : std::numeric_limits<double>::quiet_NaN();
  };
  for (const DiagnosticsRecord& r : report.records) {
    std::vector<double> row{
        r.t, r.dt, r.mass, r.sup_rho, r.inf_rho, r.sup_c, r.inf_c, r.inv_inf_rho, r.inv_inf_c,
        r.sup_u, r.div_u_sup, r.sup_f, r.sup_grad_f, r.sup_abs_lap_c, r.sup_reaction,
        r.sup_consumption_rate, r.sup_drift_rho, r.monitor, r.spectral_tail};
    for (std::size_t i = 0; i < dc.energy_orders.size(); ++i) row.push_back(vec_at(r.energies, i));
    if (dc.track_z) {
      for (int jz = 0; jz <= dc.z_order; ++jz)
        row.push_back(vec_at(r.z_orders, static_cast<std::size_t>(jz)));
      row.push_back(r.z_total);
    }
    if (dc.track_x) {
      for (int p = 0; p <= dc.x_m; ++p) row.push_back(vec_at(r.x_parts, static_cast<std::size_t>(p)));
      row.push_back(r.x_total);
    }
    row.push_back(r.y_rho);
    row.push_back(r.y_f);
    if (dc.track_ratio) {
      row.push_back(r.ratio_rho_over_c);
      row.push_back(r.ratio_c_over_rho);
    }
    if (dc.track_taylor) {
      for (int a = 0; a < sc.model.dim; ++a) row.push_back(r.taylor_C[static_cast<std::size_t>(a)]);
      for (int a = 0; a < sc.model.dim; ++a) row.push_back(r.taylor_R[static_cast<std::size_t>(a)]);
      row.push_back(r.c_at_x0);
      row.push_back(r.rho_at_x0);
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << fmt17(row[i]);
    }
    os << '\n';
  }
}

void write_field_snapshot(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open snapshot file " + path.string());
  auto put_u32 = [&os](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<std::uint32_t>(f.grid.dim));
  put_u32(static_cast<std::uint32_t>(f.grid.n));
  put_u32(static_cast<std::uint32_t>(f.components));
  for (double v : f.values) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!os) throw std::runtime_error("failed writing snapshot file " + path.string());
}

Field read_field_snapshot(const std::filesystem::path& path, double length) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open snapshot file " + path.string());
  auto get_u32 = [&is, &path]() {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
      throw std::runtime_error("truncated snapshot file " + path.string());
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  const int dim = static_cast<int>(get_u32());
  const int n = static_cast<int>(get_u32());
  const int components = static_cast<int>(get_u32());
  if (components < 1 || components > 4)
    throw std::runtime_error("implausible component count in snapshot file " + path.string());
  const Grid g = make_grid(dim, n, length);
  Field f = make_field(g, components);
  for (double& v : f.values) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
      throw std::runtime_error("truncated snapshot file " + path.string());
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    v = std::bit_cast<double>(bits);
  }
  return f;
}

std::filesystem::path export_report(const RunReport& report,
                                    const std::filesystem::path& out_root) {
  const std::filesystem::path dir = out_root / report.scenario.name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                                   ec.message());

  {
    const std::filesystem::path csv = dir / "records.csv";
    std::ofstream os(csv, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + csv.string());
    write_records_csv(os, report);
    if (!os) throw std::runtime_error("failed writing " + csv.string());
  }

  {
    json md;
    md["name"] = report.scenario.name;
    md["config_hash"] = report.config_hash;
    md["termination"] = to_string(report.termination);
    md["detail"] = report.detail;
    md["final_t"] = report.final_t;
    md["steps"] = report.steps;
    md["record_count"] = report.records.size();
    md["hypothesis_violations"] = report.hypotheses.violations;
    if (report.fit)
      md["fit"] = json{{"t_star", report.fit->t_star},
                       {"kappa", report.fit->kappa},
                       {"exponent", report.fit->exponent},
                       {"r2", report.fit->r2},
                       {"window", report.fit->window}};
    else
      md["fit"] = nullptr;
    json snaps = json::array();
    for (const State& st : report.snapshots) snaps.push_back(st.t);
    md["snapshot_times"] = snaps;
    md["scenario"] = scenario_to_json(report.scenario);
    const std::filesystem::path meta = dir / "metadata.json";
    std::ofstream os(meta, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + meta.string());
    os << md.dump(2) << '\n';
    if (!os) throw std::runtime_error("failed writing " + meta.string());
  }

  if (report.scenario.output.snapshots) {
    auto write_state = [&dir](const State& st, const std::string& stem) {
      write_field_snapshot(dir / (stem + "_rho.bin"), st.rho);
      write_field_snapshot(dir / (stem + "_c.bin"), st.c);
      if (st.u) write_field_snapshot(dir / (stem + "_u.bin"), *st.u);
    };
    if (!report.final_state.rho.values.empty()) write_state(report.final_state, "final");
    for (std::size_t i = 0; i < report.snapshots.size(); ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "snapshot_%03zu", i);
      write_state(report.snapshots[i], stem);
    }
  }
  return dir;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

Scenario preset_constants_1d() {
  Scenario sc;
  sc.name = "constants_1d";
  sc.n = 64;
  sc.model.dim = 1;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.initial.kind = InitialKind::constants;
  sc.initial.rho0 = 1.0;
  sc.initial.c0 = 1.0;
  sc.run.t_end = 1.0;
  sc.run.record_dt = 0.01;
  return sc;
}

Scenario preset_trig_1d() {
  Scenario sc;
  sc.name = "trig_1d";
  sc.n = 128;
  sc.model.dim = 1;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.initial.kind = InitialKind::trig;
  sc.initial.rho_mean = 1.0;
  sc.initial.rho_amp = 0.25;
  sc.initial.rho_phase = {0.7, 0.0};
  sc.initial.c_mean = 1.0;
  sc.initial.c_amp = 0.25;
  sc.initial.c_phase = {5.9, 0.0};
  sc.diagnostics.energy_orders = {0, 1, 2, 3};
  sc.diagnostics.z_order = 3;
  sc.diagnostics.track_z = true;
  sc.run.t_end = 1.0;
  sc.run.record_dt = 0.01;
  return sc;
}

Scenario preset_ratio_1d() {
  Scenario sc;
  sc.name = "ratio_1d";
  sc.n = 128;
  sc.model.dim = 1;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.initial.kind = InitialKind::ratio_matched;
  sc.initial.amplitude = 1.0;
  sc.initial.delta = 1.0;
  sc.initial.c_mean = 1.0;
  sc.initial.c_amp = 0.3;
  sc.initial.c_phase = {0.9, 0.0};
  sc.diagnostics.track_ratio = true;
  sc.diagnostics.ratio_delta = 1.0;
  sc.run.t_end = 0.6;  // consumption drives sup(rho/c) up ~e^t; stay within 3x
  sc.run.record_dt = 0.01;
  return sc;
}

Scenario preset_blowup_1d() {
  Scenario sc;
  sc.name = "blowup_1d";
  sc.n = 256;
  sc.model.dim = 1;
  sc.model.k.kind = CoeffKind::power;  // k(c) = c keeps the chemical positive
  sc.model.k.gamma = 1.0;
  sc.initial.kind = InitialKind::quadratic_vanishing;
  sc.initial.C0 = 0.2;
  sc.initial.R0 = 0.2;
  sc.initial.c_base = 1.0;
  sc.initial.x0 = {0.0, 0.0};
  sc.diagnostics.energy_orders = {};
  sc.diagnostics.track_z = false;
  sc.diagnostics.track_taylor = true;
  sc.diagnostics.taylor_x0 = {0.0, 0.0};
  // Reference blow-up time of the Taylor closure is ~1.3977. The n = 256
  // Galerkin dynamics stay spectrally resolved but lag the continuum growth
  // once C exceeds ~3, independent of the step size, so the run stops at 1.30
  // and the 1/C fit spans [1.005, 1.30] where C grows from 1.0 to 3.1 --
  // asymptotic enough for the fit, faithful enough to extrapolate from.
  sc.run.t_end = 1.30;
  sc.run.record_dt = 0.005;
  sc.run.abort_monitor = 1e5;
  sc.run.snapshot_dt = 0.05;
  sc.run.fit_window = 60;
  return sc;
}

Scenario preset_blowup_2d() {
  Scenario sc;
  sc.name = "blowup_2d";
  sc.n = 128;
  sc.model.dim = 2;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.initial.kind = InitialKind::quadratic_vanishing;
  sc.initial.C0 = 0.1;
  sc.initial.R0 = 0.1;
  sc.initial.c_base = 1.0;
  sc.initial.x0 = {0.0, 0.0};
  sc.diagnostics.energy_orders = {};
  sc.diagnostics.track_z = false;
  sc.diagnostics.track_taylor = true;
  sc.diagnostics.taylor_x0 = {0.0, 0.0};
  sc.run.t_end = 1.05;  // covers C growing from 0.1 past 0.3
  sc.run.record_dt = 0.01;
  sc.run.abort_monitor = 1e5;
  sc.run.fit_window = 40;
  return sc;
}

Scenario preset_ksf_2d() {
  Scenario sc;
  sc.name = "ksf_2d";
  sc.n = 64;
  sc.model.dim = 2;
  sc.model.include_fluid = true;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.phi.enabled = true;
  sc.phi.mode = {0, 1};
  sc.phi.amplitude = 0.5;
  sc.phi.phase = 0.0;
  sc.initial.kind = InitialKind::trig;
  sc.initial.rho_mean = 1.0;
  sc.initial.rho_amp = 0.25;
  sc.initial.rho_phase = {0.7, 1.3};
  sc.initial.c_mean = 1.0;
  sc.initial.c_amp = 0.2;
  sc.initial.c_phase = {2.1, 4.0};
  sc.initial.velocity = VelocityKind::taylor_green;
  sc.initial.vel_amplitude = 0.2;
  sc.diagnostics.energy_orders = {0, 1, 2};
  sc.diagnostics.z_order = 2;
  sc.diagnostics.track_z = true;
  sc.run.t_end = 0.5;
  sc.run.record_dt = 0.01;
  return sc;
}

Scenario preset_rotational_2d() {
  Scenario sc;
  sc.name = "rotational_2d";
  sc.n = 64;
  sc.model.dim = 2;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.model.S.s = {{{1.0, 0.5}, {-0.5, 1.0}}};
  sc.initial.kind = InitialKind::trig;
  sc.initial.rho_mean = 1.0;
  sc.initial.rho_amp = 0.25;
  sc.initial.rho_phase = {0.4, 2.6};
  sc.initial.c_mean = 1.0;
  sc.initial.c_amp = 0.2;
  sc.initial.c_phase = {1.8, 5.1};
  sc.diagnostics.energy_orders = {0, 1, 2};
  sc.diagnostics.z_order = 2;
  sc.diagnostics.track_z = true;
  sc.run.t_end = 0.3;
  sc.run.record_dt = 0.01;
  return sc;
}

Scenario preset_illposed_flip_1d() {
  Scenario sc;
  sc.name = "illposed_flip_1d";
  sc.n = 128;
  sc.model.dim = 1;
  sc.model.k.kind = CoeffKind::power;
  sc.model.k.gamma = 1.0;
  sc.model.consumption_sign = -1.0;  // production sign: hypothesis-violating demo
  sc.initial.kind = InitialKind::trig;
  sc.initial.rho_mean = 1.0;
  sc.initial.rho_amp = 0.5;
  sc.initial.rho_phase = {0.0, 0.0};
  sc.initial.c_mean = 1.0;
  sc.initial.c_amp = 0.4;
  sc.initial.c_phase = {2.5, 0.0};
  sc.diagnostics.track_z = false;
  sc.stepper.dt_min = 1e-7;
  sc.run.t_end = 5.0;
  sc.run.record_dt = 0.01;
  // Well-posed presets keep the monitor around ten; the flipped sign blows
  // through 1e2 within the first time unit, stopping via the threshold.
  sc.run.abort_monitor = 1e2;
  return sc;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"constants_1d", "trig_1d",       "ratio_1d",      "blowup_1d",
          "blowup_2d",    "ksf_2d",        "rotational_2d", "illposed_flip_1d"};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "constants_1d") return preset_constants_1d();
  if (name == "trig_1d") return preset_trig_1d();
  if (name == "ratio_1d") return preset_ratio_1d();
  if (name == "blowup_1d") return preset_blowup_1d();
  if (name == "blowup_2d") return preset_blowup_2d();
  if (name == "ksf_2d") return preset_ksf_2d();
  if (name == "rotational_2d") return preset_rotational_2d();
  if (name == "illposed_flip_1d") return preset_illposed_flip_1d();
  throw std::invalid_argument("unknown preset scenario: " + name);
}

}  // namespace kslab
