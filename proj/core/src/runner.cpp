#include "hyperlab/runner.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "suites.hpp"

namespace hyperlab::runner {

using nlohmann::json;

namespace {

const std::map<std::string, SuiteFn>& suite_table() {
  static const std::map<std::string, SuiteFn> table{
      {"curvature", suite_curvature},         {"bilaplacian", suite_bilaplacian},
      {"evolution", suite_evolution},         {"convexity", suite_convexity},
      {"gaussian-decay", suite_gaussian_decay}, {"commutator", suite_commutator},
      {"carleman", suite_carleman},           {"carleman-heat", suite_carleman_heat},
      {"carleman-qlog", suite_carleman_qlog}, {"mollifier", suite_mollifier},
      {"asymptotics", suite_asymptotics},     {"kinematics", suite_kinematics},
  };
  return table;
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw SchemaError(path + "/" + key, "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) throw SchemaError(path, "must be positive");
  return v;
}

double get_nonnegative(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (v < 0.0) throw SchemaError(path, "must be non-negative");
  return v;
}

int get_int(const json& j, const std::string& path, int lo) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > 1'000'000'000) throw SchemaError(path, "must be an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  auto v = j.get<std::string>();
  if (!allowed.empty() && !allowed.contains(v)) throw SchemaError(path, "unsupported value '" + v + "'");
  return v;
}

void parse_profile(const json& j, const std::string& path, ProfileConfig& out, const std::set<std::string>& kinds) {
  check_keys(j, path, {"kind", "amplitude", "scale"});
  if (j.contains("kind")) out.kind = get_string(j["kind"], path + "/kind", kinds);
  if (j.contains("amplitude")) out.amplitude = get_number(j["amplitude"], path + "/amplitude");
  if (j.contains("scale")) out.scale = get_positive(j["scale"], path + "/scale");
}

json profile_json(const ProfileConfig& p) {
  return json{{"kind", p.kind}, {"amplitude", p.amplitude}, {"scale", p.scale}};
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{
      "bilaplacian", "curvature", "kinematics", "evolution", "commutator", "gaussian-decay",
      "convexity", "mollifier", "carleman", "carleman-heat", "carleman-qlog", "asymptotics"};
  return names;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tol{
      {"interval_slack", 1e-9},      // bilaplacian interval endpoints
      {"n3_constant", 1e-12},        // |Delta^2 rho^2 - 8| for n = 3
      {"slope", 0.3},                // fitted log-log slope slack (curvature, bilaplacian)
      {"oracle_rel", 1e-4},          // closed form vs finite-difference oracle
      {"flat", 1e-9},                // Lambda = 0 identities
      {"residual", 1e-4},            // Riccati and Bochner residuals
      {"kinematics", 1e-5},          // moving-centre derivatives vs FD in time
      {"phase_error", 1e-4},         // eigenfunction phase error at the finest level
      {"order", 0.3},                // observed convergence order slack
      {"commutator_gap", 1e-3},      // matrix vs geometric side
      {"refinement_ratio", 3.5},     // minimum gap reduction on halving the step
      {"lower_bound", 1e-3},         // commutator lower-bound slack
      {"decay_margin", 1e-9},        // Gaussian decay log margin slack
      {"ode_residual", 1e-10},       // alpha(t) ODE residual
      {"space_time", 1e-9},          // space-time log margin slack
      {"spot", 1e-12},               // closed-form spot values
      {"convexity", 1e-3},           // min second difference of log H
      {"n_hat_rel", 0.2},            // relative change of N-hat under refinement
      {"mollifier_slope", 0.2},      // epsilon^2 scaling slope slack
      {"mollifier_upper", 1e-12},    // slack of the upper bound
      {"carleman_ratio", 5e-2},      // ratio >= 1 - tol
      {"virial", 1e-3},              // virial gap slack
      {"identity", 1e-12},           // exponent identity residual
      {"laplace", 0.05},             // |asymptotic ratio - 1| at the reference radius
      {"gamma0", 1e-8},              // insensitivity of the Laplace integral to gamma0
  };
  return tol;
}

ExperimentConfig default_config(const std::string& check) {
  if (!suite_table().contains(check)) throw SchemaError("/check", "unknown check '" + check + "'");
  ExperimentConfig c;
  c.check = check;
  c.output = "out/" + check;
  auto& p = c.physics;
  if (check == "curvature") {
    c.dims = {2, 3, 4};
    c.corpus.size = 100;
  } else if (check == "bilaplacian") {
    c.dims = {2, 3, 4, 5, 6};
  } else if (check == "kinematics") {
    c.corpus.size = 1000;
  } else if (check == "evolution") {
    c.dims = {3};
    c.grid = {6.0, 800, 0};
    p.a = 0.0;
    p.b = 1.0;
    p.dt = 1e-3;
    p.t_final = 0.1;
    p.initial = {"eigenfunction", 1.0, 3.0};
  } else if (check == "commutator") {
    c.dims = {3};
    c.grid = {7.0, 600, 0};
    p.a = 0.0;
    p.b = 1.0;
    p.gammas = {0.5};
    c.corpus.size = 50;
  } else if (check == "gaussian-decay") {
    c.dims = {2, 3};
    c.grid = {8.0, 400, 0};
    p.a = 1.0 / std::sqrt(2.0);
    p.b = 1.0 / std::sqrt(2.0);
    p.gammas = {0.1, 0.3};
    p.dt = 1e-2;
    p.t_final = 1.0;
    p.initial = {"gaussian", 1.0, 0.5};
  } else if (check == "convexity") {
    c.dims = {3};
    c.grid = {14.0, 280, 0};
    p.a = 1.0 / std::sqrt(2.0);
    p.b = 1.0 / std::sqrt(2.0);
    p.gammas = {0.05};
    p.dt = 1e-2;
    p.t_final = 1.0;
    p.initial = {"radial_decay", 1.0, 0.25};
    c.weight.sigma = 0.02;
  } else if (check == "mollifier") {
    c.weight.R = 3.0;
    c.corpus.size = 100;
  } else if (check == "carleman" || check == "carleman-heat") {
    c.grid = {5.0, 250, 512};
    c.weight = {check == "carleman" ? "schrodinger_moving" : "heat_moving", 1.0, 1.0, 12.0, 1, 0.02};
    c.corpus.size = 100;
  } else if (check == "carleman-qlog") {
    c.weight = {"quadratic_log", 0.0, 1.0, std::exp(3.0), 1, 0.02};
    c.corpus.size = 20;
  } else if (check == "asymptotics") {
    c.weight.sigma = 1.0;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "", {"check", "n", "grid", "physics", "weight", "tolerances", "corpus", "output"});
  if (!j.contains("check")) throw SchemaError("/check", "missing");
  const std::string check = get_string(j["check"], "/check", {});
  ExperimentConfig c = default_config(check);

  if (j.contains("n")) {
    const json& n = j["n"];
    c.dims.clear();
    if (n.is_array()) {
      if (n.empty()) throw SchemaError("/n", "must not be empty");
      for (std::size_t k = 0; k < n.size(); ++k) c.dims.push_back(get_int(n[k], "/n/" + std::to_string(k), 2));
    } else {
      c.dims.push_back(get_int(n, "/n", 2));
    }
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "/grid", {"rho_max", "cells", "angular_cells"});
    if (g.contains("rho_max")) c.grid.rho_max = get_positive(g["rho_max"], "/grid/rho_max");
    if (g.contains("cells")) c.grid.cells = get_int(g["cells"], "/grid/cells", 8);
    if (g.contains("angular_cells")) c.grid.angular_cells = get_int(g["angular_cells"], "/grid/angular_cells", 0);
  }
  if (j.contains("physics")) {
    const json& p = j["physics"];
    check_keys(p, "/physics", {"a", "b", "gamma", "V", "F", "dt", "t_final", "initial"});
    if (p.contains("a")) c.physics.a = get_nonnegative(p["a"], "/physics/a");
    if (p.contains("b")) c.physics.b = get_number(p["b"], "/physics/b");
    if (p.contains("gamma")) {
      const json& g = p["gamma"];
      c.physics.gammas.clear();
      if (g.is_array()) {
        if (g.empty()) throw SchemaError("/physics/gamma", "must not be empty");
        for (std::size_t k = 0; k < g.size(); ++k) {
          c.physics.gammas.push_back(get_nonnegative(g[k], "/physics/gamma/" + std::to_string(k)));
        }
      } else {
        c.physics.gammas.push_back(get_nonnegative(g, "/physics/gamma"));
      }
    }
    if (p.contains("V")) parse_profile(p["V"], "/physics/V", c.physics.V, {"zero", "constant", "gaussian"});
    if (p.contains("F")) parse_profile(p["F"], "/physics/F", c.physics.F, {"zero", "gaussian"});
    if (p.contains("dt")) c.physics.dt = get_positive(p["dt"], "/physics/dt");
    if (p.contains("t_final")) c.physics.t_final = get_positive(p["t_final"], "/physics/t_final");
    if (p.contains("initial")) {
      parse_profile(p["initial"], "/physics/initial", c.physics.initial, {"gaussian", "radial_decay", "eigenfunction"});
    }
    if (c.physics.a == 0.0 && c.physics.b == 0.0) throw SchemaError("/physics/b", "a and b must not both vanish");
  }
  if (j.contains("weight")) {
    const json& w = j["weight"];
    check_keys(w, "/weight", {"kind", "mu", "eps", "R", "ell", "sigma"});
    if (w.contains("kind")) {
      c.weight.kind = get_string(w["kind"], "/weight/kind",
                                 {"static_quadratic", "schrodinger_moving", "heat_moving", "quadratic_log"});
    }
    // mu = 0 selects the hypothesis threshold for the quadratic-log weight.
    if (w.contains("mu")) {
      c.weight.mu = c.weight.kind == "quadratic_log" ? get_nonnegative(w["mu"], "/weight/mu")
                                                      : get_positive(w["mu"], "/weight/mu");
    }
    if (w.contains("eps")) c.weight.eps = get_positive(w["eps"], "/weight/eps");
    if (w.contains("R")) c.weight.R = get_positive(w["R"], "/weight/R");
    if (w.contains("ell")) c.weight.ell = get_int(w["ell"], "/weight/ell", 1);
    if (w.contains("sigma")) c.weight.sigma = get_positive(w["sigma"], "/weight/sigma");
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw SchemaError("/tolerances", "expected an object");
    const auto& known = default_tolerances();
    for (const auto& [key, value] : t.items()) {
      if (!known.contains(key)) throw SchemaError("/tolerances/" + key, "unknown tolerance");
      c.tolerances[key] = get_positive(value, "/tolerances/" + key);
    }
  }
  if (j.contains("corpus")) {
    const json& k = j["corpus"];
    check_keys(k, "/corpus", {"seed", "size"});
    if (k.contains("seed")) {
      if (!k["seed"].is_number_unsigned()) throw SchemaError("/corpus/seed", "expected a non-negative integer");
      c.corpus.seed = k["seed"].get<std::uint64_t>();
    }
    if (k.contains("size")) c.corpus.size = get_int(k["size"], "/corpus/size", 0);
  }
  if (j.contains("output")) c.output = get_string(j["output"], "/output", {});
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["check"] = c.check;
  j["n"] = c.dims;
  j["grid"] = {{"rho_max", c.grid.rho_max}, {"cells", c.grid.cells}, {"angular_cells", c.grid.angular_cells}};
  j["physics"] = {{"a", c.physics.a},
                  {"b", c.physics.b},
                  {"gamma", c.physics.gammas},
                  {"V", profile_json(c.physics.V)},
                  {"F", profile_json(c.physics.F)},
                  {"dt", c.physics.dt},
                  {"t_final", c.physics.t_final},
                  {"initial", profile_json(c.physics.initial)}};
  j["weight"] = {{"kind", c.weight.kind}, {"mu", c.weight.mu},   {"eps", c.weight.eps},
                 {"R", c.weight.R},       {"ell", c.weight.ell}, {"sigma", c.weight.sigma}};
  j["tolerances"] = c.tolerances;
  j["corpus"] = {{"seed", c.corpus.seed}, {"size", c.corpus.size}};
  j["output"] = c.output;
  return j.dump(2);
}

std::vector<carleman::TestBump> corpus(std::uint64_t seed, const CorpusSpec& spec) {
  if (spec.size < 0) throw DomainError("corpus size must be non-negative");
  const double widest = 3.0 * spec.width_hi;
  const double lo = spec.rho_min + spec.margin + widest, hi = spec.rho_max - spec.margin - widest;
  const double t_lo = spec.margin_t + 3.0 * spec.t_width_hi, t_hi = 1.0 - t_lo;
  if (spec.size > 0 && (lo >= hi || t_lo >= t_hi)) throw DomainError("corpus annulus cannot hold the widest bump");
  std::mt19937_64 rng(seed);
  std::vector<carleman::TestBump> out;
  out.reserve(static_cast<std::size_t>(spec.size));
  for (int k = 0; k < spec.size; ++k) {
    carleman::TestBump b;
    b.width = spec.width_lo + (spec.width_hi - spec.width_lo) * unit01(rng);
    b.t_width = spec.t_width_lo + (spec.t_width_hi - spec.t_width_lo) * unit01(rng);
    b.rho_c = lo + (hi - lo) * unit01(rng);
    b.theta_c = 2.0 * kPi * unit01(rng);
    b.t_c = t_lo + (t_hi - t_lo) * unit01(rng);
    b.amplitude = 1.0;
    if (!carleman::bump_inside(b, spec.rho_min, spec.rho_max, spec.margin, spec.margin_t)) {
      throw DomainError("generated bump violates the support margin");
    }
    out.push_back(b);
  }
  return out;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < std::min(jobs, count); ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

CheckReport run(const ExperimentConfig& config, const RunOptions& options) {
  const auto it = suite_table().find(config.check);
  if (it == suite_table().end()) throw SchemaError("/check", "unknown check '" + config.check + "'");
  for (const auto& [key, value] : config.tolerances) {
    if (!default_tolerances().contains(key)) throw SchemaError("/tolerances/" + key, "unknown tolerance");
    if (!(value > 0.0)) throw SchemaError("/tolerances/" + key, "must be positive");
  }
  SuiteContext ctx{config, options, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    it->second(ctx);
  } catch (const std::exception& e) {
    throw SuiteError("suite '" + config.check + "': " + e.what());
  }
  CheckReport report = std::move(ctx.report);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.check = config.check;
  report.config_json = config_to_json(config);
  report.pass = true;
  for (const auto& v : report.verdicts) report.pass = report.pass && v.pass;
  if (options.write) write_report(report, config.output);
  return report;
}

}  // namespace hyperlab::runner
