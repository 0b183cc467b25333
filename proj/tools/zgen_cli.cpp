// Batch front end: each subcommand runs one verification suite or
// computation and emits a machine-readable report (JSON or flattened
// CSV). Exit codes: 0 pass, 1 verification failure, 2 usage/config error.

#include <complex>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zgen/fock.hpp"
#include "zgen/genfun.hpp"
#include "zgen/lattice.hpp"
#include "zgen/oracle.hpp"
#include "zgen/wick.hpp"

using json = nlohmann::ordered_json;
using namespace zgen;
using Complex = std::complex<double>;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  lattice::ModelSpec model;
  int p_max = 2;
  int m_max = 12;
  int n_max = 3;
  int steps = 200;
  int dim = 16;
  double tol = 1e-6;
  double fock_tol = 1e-3;
  double phi_max = 40.0;
  int nodes = 4000;
  double amplitude = 0.4;
  std::string output;
  std::string format = "json";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto num = [&] { return std::stod(value); };
  auto integer = [&] { return std::stoi(value); };
  if (key == "geometry") {
    if (value == "point")
      cfg.model.geometry = lattice::Geometry::Point;
    else if (value == "chain")
      cfg.model.geometry = lattice::Geometry::Chain;
    else
      throw UsageError("unknown geometry '" + value + "'");
  } else if (key == "N") {
    cfg.model.sites = integer();
    if (cfg.model.sites > 1) cfg.model.geometry = lattice::Geometry::Chain;
  } else if (key == "a")
    cfg.model.spacing = num();
  else if (key == "m")
    cfg.model.mass = num();
  else if (key == "epsilon")
    cfg.model.epsilon = num();
  else if (key == "lambda")
    cfg.model.coupling = num();
  else if (key == "boundary") {
    if (value == "periodic")
      cfg.model.boundary = lattice::Boundary::Periodic;
    else if (value == "dirichlet")
      cfg.model.boundary = lattice::Boundary::Dirichlet;
    else
      throw UsageError("unknown boundary '" + value + "'");
  } else if (key == "p_max")
    cfg.p_max = integer();
  else if (key == "m_max")
    cfg.m_max = integer();
  else if (key == "n_max")
    cfg.n_max = integer();
  else if (key == "steps")
    cfg.steps = integer();
  else if (key == "dim")
    cfg.dim = integer();
  else if (key == "tol")
    cfg.tol = num();
  else if (key == "fock_tol")
    cfg.fock_tol = num();
  else if (key == "phi_max")
    cfg.phi_max = num();
  else if (key == "nodes")
    cfg.nodes = integer();
  else if (key == "amplitude")
    cfg.amplitude = num();
  else
    throw UsageError("unknown config key '" + key + "'");
}

void load_config(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw UsageError("malformed config line: " + line);
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (cfg.tol < 0 || cfg.fock_tol < 0) throw UsageError("tolerances must not be negative");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

void flatten_csv(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_csv(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten_csv(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << "," << j.dump() << "\n";
  }
}

int emit(const RunConfig& cfg, json report, int code) {
  report["exit"] = code;
  std::ostringstream body;
  if (cfg.format == "csv") {
    body << "key,value\n";
    flatten_csv(report, "", body);
  } else {
    body << report.dump(2) << "\n";
  }
  if (cfg.output.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(cfg.output);
    if (!out) throw UsageError("cannot write output file " + cfg.output);
    out << body.str();
  }
  return code;
}

json model_json(const lattice::ModelSpec& m) {
  return {{"geometry", m.geometry == lattice::Geometry::Point ? "point" : "chain"},
          {"N", m.sites},
          {"a", m.spacing},
          {"m", m.mass},
          {"epsilon", m.epsilon},
          {"lambda", m.coupling},
          {"boundary", m.boundary == lattice::Boundary::Periodic ? "periodic" : "dirichlet"}};
}

int cmd_wick_verify(const RunConfig& cfg) {
  if (cfg.m_max < 1) throw UsageError("m-max must be at least 1");
  auto rep = wick::verify_coefficient_identity(cfg.m_max);
  json out{{"schema", 1}, {"command", "wick-verify"}, {"m_max", cfg.m_max}};
  json cases = json::array();
  std::string first_fail;
  for (const auto& c : rep.cases) {
    cases.push_back({{"m", c.m}, {"r", c.r}, {"pass", c.pass}});
    if (!c.pass && first_fail.empty())
      first_fail = "(" + std::to_string(c.m) + "," + std::to_string(c.r) + ")";
  }
  out["cases_checked"] = rep.cases.size();
  out["cases"] = std::move(cases);
  out["all_pass"] = rep.all_pass;
  if (!first_fail.empty()) out["first_failure"] = first_fail;
  return emit(cfg, out, rep.all_pass ? kExitPass : kExitFail);
}

int cmd_propagator(const RunConfig& cfg) {
  auto kernel = lattice::build_kernel(cfg.model);
  json out{{"schema", 1}, {"command", "propagator"}, {"model", model_json(cfg.model)}};
  try {
    auto prop = lattice::propagator(kernel);
    out["residual"] = prop.residual;
    json rows = json::array();
    for (int i = 0; i < prop.matrix.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < prop.matrix.cols(); ++j) row.push_back(complex_json(prop.matrix(i, j)));
      rows.push_back(std::move(row));
    }
    out["delta"] = std::move(rows);
    return emit(cfg, out, kExitPass);
  } catch (const std::runtime_error& e) {
    out["error"] = e.what();
    return emit(cfg, out, kExitFail);
  }
}

json series_json(const genfun::PerturbativeSeries& s) {
  json orders = json::array();
  for (int p = 0; p < (int)s.order_terms.size(); ++p) {
    json terms = json::array();
    for (const auto& [mono, coeff] : s.order_terms[p].terms())
      terms.push_back({{"j", mono.j}, {"phi", mono.phi}, {"coeff", complex_json(coeff)}});
    orders.push_back({{"order", p}, {"terms", std::move(terms)}});
  }
  return orders;
}

int cmd_z_series(const RunConfig& cfg) {
  auto prop = std::make_shared<lattice::Propagator>(
      lattice::propagator(lattice::build_kernel(cfg.model)));
  auto series = genfun::normalize(genfun::z_series(prop, cfg.p_max));
  json out{{"schema", 1},
           {"command", "z-series"},
           {"model", model_json(cfg.model)},
           {"p_max", cfg.p_max},
           {"normalized", true},
           {"orders", series_json(series)}};
  return emit(cfg, out, kExitPass);
}

int cmd_green(const RunConfig& cfg, const std::string& points_arg) {
  std::vector<int> points;
  std::stringstream ss(points_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int x = std::stoi(tok);
    if (x < 0 || x >= cfg.model.sites) throw UsageError("point index out of range: " + tok);
    points.push_back(x);
  }
  if (points.empty()) throw UsageError("green: at least one point required");
  auto prop = std::make_shared<lattice::Propagator>(
      lattice::propagator(lattice::build_kernel(cfg.model)));
  auto series = genfun::normalize(genfun::z_series(prop, cfg.p_max));
  auto g = genfun::green(series, points);
  json out{{"schema", 1},
           {"command", "green"},
           {"model", model_json(cfg.model)},
           {"points", points},
           {"p_max", cfg.p_max},
           {"normalized", true}};
  json per_order = json::array();
  for (Complex v : g.per_order) per_order.push_back(complex_json(v));
  out["per_order"] = std::move(per_order);
  if (points.size() % 2 != 0)
    out["parity_note"] = "odd point count: exactly zero by Gaussian parity";
  return emit(cfg, out, kExitPass);
}

int cmd_compare(const RunConfig& cfg) {
  oracle::QuadratureSpec quad{cfg.phi_max, cfg.nodes};
  Eigen::VectorXd source = Eigen::VectorXd::Constant(cfg.model.sites, cfg.amplitude);
  auto rep = oracle::compare_routes(cfg.model, quad, source, cfg.p_max, cfg.tol);
  json out{{"schema", 1},
           {"command", "compare"},
           {"model", model_json(cfg.model)},
           {"p_max", cfg.p_max},
           {"tol", cfg.tol},
           {"amplitude", cfg.amplitude}};
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"quantity", r.quantity},
                    {"order", r.order},
                    {"series", complex_json(r.series_value)},
                    {"quadrature", complex_json(r.quadrature_value)},
                    {"abs_dev", r.abs_dev},
                    {"rel_dev", r.rel_dev},
                    {"pass", r.pass}});
  out["rows"] = std::move(rows);
  out["all_pass"] = rep.all_pass;
  if (!rep.all_pass)
    for (const auto& r : rep.rows)
      if (!r.pass) {
        out["first_failure"] = {{"quantity", r.quantity},
                                {"order", r.order},
                                {"rel_dev", r.rel_dev}};
        break;
      }
  return emit(cfg, out, rep.all_pass ? kExitPass : kExitFail);
}

int cmd_fock_check(const RunConfig& cfg) {
  fock::FockSpace space(cfg.dim, cfg.model.mass);
  auto pulse = [&](double t) {
    double u = (t - 2.0) / 0.5;
    return cfg.amplitude * std::exp(-0.5 * u * u);
  };
  json out{{"schema", 1},
           {"command", "fock-check"},
           {"dim", cfg.dim},
           {"omega", cfg.model.mass},
           {"steps", cfg.steps},
           {"amplitude", cfg.amplitude},
           {"tol", cfg.fock_tol}};

  fock::TimeGrid grid(0.0, 4.0, cfg.steps);
  auto wick_rep = fock::check_wick_identity(space, grid, pulse);
  out["wick"] = {{"lhs", complex_json(wick_rep.lhs)},
                 {"rhs", complex_json(wick_rep.rhs)},
                 {"residual", wick_rep.residual},
                 {"unitarity_defect", wick_rep.unitarity_defect}};
  // truncation check: if a deeper space shrinks the residual markedly,
  // the error is truncation-dominated rather than slicing-dominated
  fock::FockSpace deeper(cfg.dim + 4, cfg.model.mass);
  double deep_residual = fock::check_wick_identity(deeper, grid, pulse).residual;
  out["deep_residual"] = deep_residual;
  out["truncation_warning"] =
      wick_rep.residual > cfg.fock_tol && wick_rep.residual > 2.0 * deep_residual;

  bool converged = false;
  json convergence = json::array();
  if (cfg.steps >= 8) {
    std::vector<double> residuals;
    for (int mult : {1, 2, 4}) {
      fock::TimeGrid g(0.0, 4.0, cfg.steps * mult);
      residuals.push_back(fock::check_wick_identity(space, g, pulse).residual);
    }
    converged = true;
    for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
      double ratio = residuals[i] / residuals[i + 1];
      convergence.push_back(ratio);
      converged = converged && ratio > 3.5 && ratio < 4.5;
    }
  }
  out["convergence_ratios"] = convergence;
  out["converged"] = converged;

  auto fact = fock::check_factorization(space, 0.0, 4.0, cfg.model.coupling, pulse,
                                        {std::max(cfg.steps / 8, 1), std::max(cfg.steps / 4, 2),
                                         std::max(cfg.steps / 2, 4)});
  out["factorization"] = {{"steps", fact.steps},
                          {"deviation", fact.deviation},
                          {"ratios", fact.ratio}};

  bool pass = wick_rep.residual < cfg.fock_tol && converged;
  return emit(cfg, out, pass ? kExitPass : kExitFail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generating-functional verification suites"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::string points_arg = "0,0";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "plain-text key = value config file");
    sub->add_option("--output", cfg.output, "write the report to this path");
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--p-max", cfg.p_max, "perturbative truncation order");
    sub->add_option("--m-max", cfg.m_max, "largest field count checked");
    sub->add_option("--steps", cfg.steps, "time slices");
    sub->add_option("--dim", cfg.dim, "Fock truncation dimension");
    sub->add_option("--lambda", cfg.model.coupling, "quartic coupling");
    sub->add_option("--mass", cfg.model.mass, "mass (also the mode frequency)");
    sub->add_option("--epsilon", cfg.model.epsilon, "damping parameter");
    sub->add_option("--tol", cfg.tol, "comparison tolerance");
    return sub;
  };

  auto* wick_cmd = add_common(app.add_subcommand("wick-verify", "exact coefficient identity"));
  auto* prop_cmd = add_common(app.add_subcommand("propagator", "kernel and propagator build"));
  auto* zs_cmd = add_common(app.add_subcommand("z-series", "perturbative series dump"));
  auto* green_cmd = add_common(app.add_subcommand("green", "n-point Green's function"));
  green_cmd->add_option("--points", points_arg, "comma-separated site indices");
  auto* cmp_cmd = add_common(app.add_subcommand("compare", "series vs quadrature routes"));
  auto* fock_cmd = add_common(app.add_subcommand("fock-check", "operator-level identities"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    // config file values first, then any flag given explicitly wins
    if (!config_path.empty()) {
      RunConfig flag_cfg = cfg;
      cfg = RunConfig{};
      cfg.output = flag_cfg.output;
      cfg.format = flag_cfg.format;
      load_config(cfg, config_path);
      if (sub->count("--p-max")) cfg.p_max = flag_cfg.p_max;
      if (sub->count("--m-max")) cfg.m_max = flag_cfg.m_max;
      if (sub->count("--steps")) cfg.steps = flag_cfg.steps;
      if (sub->count("--dim")) cfg.dim = flag_cfg.dim;
      if (sub->count("--lambda")) cfg.model.coupling = flag_cfg.model.coupling;
      if (sub->count("--mass")) cfg.model.mass = flag_cfg.model.mass;
      if (sub->count("--epsilon")) cfg.model.epsilon = flag_cfg.model.epsilon;
      if (sub->count("--tol")) cfg.tol = flag_cfg.tol;
    }
    if (fock_cmd->parsed() && sub->count("--tol")) cfg.fock_tol = cfg.tol;

    if (wick_cmd->parsed()) return cmd_wick_verify(cfg);
    if (prop_cmd->parsed()) return cmd_propagator(cfg);
    if (zs_cmd->parsed()) return cmd_z_series(cfg);
    if (green_cmd->parsed()) return cmd_green(cfg, points_arg);
    if (cmp_cmd->parsed()) return cmd_compare(cfg);
    if (fock_cmd->parsed()) return cmd_fock_check(cfg);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
