#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "levy_procure/config.hpp"
#include "levy_procure/errors.hpp"
#include "levy_procure/estimators.hpp"
#include "levy_procure/levy_price.hpp"
#include "levy_procure/payoff.hpp"
#include "levy_procure/policy.hpp"

using namespace levy_procure;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kAssumption = 2, kIo = 3, kNumerical = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Command-line overrides; anything left unset keeps the config/env value.
struct Overrides {
  std::string config_path;
  std::optional<std::string> format, output;
  std::optional<double> r, lambda, epsilon, gamma, c, alpha, alpha_p, alpha_s, y0;
  std::optional<std::string> model;
  std::optional<double> mu, sigma, psi, ell;
  std::optional<std::size_t> n_paths;
  std::optional<double> horizon, dt;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

json overrides_json(const Overrides& o) {
  json j = json::object();
  auto put = [&](const char* sec, const char* key, const auto& v) {
    if (v) j[sec][key] = *v;
  };
  put("market", "r", o.r);
  put("market", "lambda", o.lambda);
  put("market", "epsilon", o.epsilon);
  put("market", "gamma", o.gamma);
  put("market", "c", o.c);
  put("market", "alpha", o.alpha);
  put("market", "alpha_p", o.alpha_p);
  put("market", "alpha_s", o.alpha_s);
  put("market", "y0", o.y0);
  put("model", "type", o.model);
  put("model", "mu", o.mu);
  put("model", "sigma", o.sigma);
  put("model", "psi", o.psi);
  put("model", "ell", o.ell);
  put("mc", "n_paths", o.n_paths);
  put("mc", "horizon", o.horizon);
  put("mc", "dt", o.dt);
  put("mc", "threads", o.threads);
  put("output", "format", o.format);
  put("output", "path", o.output);
  return j;
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path, cfg);
  apply_seed_env(cfg);
  cfg = config_from_json(overrides_json(o), cfg);
  if (o.seed) cfg.mc.seed = *o.seed;
  validate_config(cfg);
  return cfg;
}

class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw IoError(path + ": cannot open for writing");
    }
    out().precision(12);
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }
  void finish() {
    out().flush();
    if (!out()) throw IoError(path_ + ": write failed");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci_low", e.ci_low},
          {"ci_high", e.ci_high}, {"n", e.n}, {"seed", e.seed}};
}

// The derived constants shared by the reports.
json constants_json(const RunConfig& cfg) {
  const auto& p = cfg.market;
  json j;
  j["beta"] = p.beta();
  j["delta"] = effective_delta(cfg.model);
  j["no_invest"] = no_invest(p, effective_delta(cfg.model));
  try {
    const PolicyCoefficients c = coefficients(p, cfg.model);
    j["xi"] = std::isfinite(c.xi) ? json(c.xi) : json("inf");
    j["kappa"] = c.kappa;
    j["a"] = c.a;
    j["b"] = c.b;
    j["base_inventory_cap"] = c.base_inventory_cap();
    const NewsvendorReport nv = newsvendor(p, cfg.model);
    j["eta"] = nv.eta;
    j["y_star"] = nv.y_star;
  } catch (const std::exception&) {
    // constants that need the policy are left out when it is not defined
  }
  return j;
}

json report_base(const std::string& command, const RunConfig& cfg) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"config", to_json(cfg)},
          {"constants", constants_json(cfg)}};
}

// CSV rows of constants: name,value
std::vector<std::pair<std::string, double>> constant_columns(const json& constants) {
  std::vector<std::pair<std::string, double>> cols;
  for (const char* key : {"beta", "delta", "xi", "kappa", "a", "b", "eta", "y_star"}) {
    if (!constants.contains(key)) continue;
    const json& v = constants.at(key);
    cols.emplace_back(key, v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity());
  }
  return cols;
}

void write_csv_constants_header(std::ostream& os, const json& constants) {
  for (const auto& [name, v] : constant_columns(constants)) os << ',' << name;
}

void write_csv_constants_row(std::ostream& os, const json& constants) {
  for (const auto& [name, v] : constant_columns(constants)) os << ',' << v;
}

// CSV reports lose the embedded config; a sidecar file next to the output keeps it.
void write_sidecar(const RunConfig& cfg) {
  if (cfg.output.path == "-") return;
  const std::string path = cfg.output.path + ".config.json";
  std::ofstream f(path);
  if (!f) throw IoError(path + ": cannot open for writing");
  f << to_json(cfg).dump(2) << '\n';
  if (!f) throw IoError(path + ": write failed");
}

void emit_json(const RunConfig& cfg, const json& report) {
  Sink sink(cfg.output.path);
  sink.out() << report.dump(2) << '\n';
  sink.finish();
}

int cmd_validate(const RunConfig& cfg) {
  const auto checks = validate(cfg.market, cfg.model);
  const bool ok = all_hard_satisfied(checks);
  if (cfg.output.format == OutputFormat::json) {
    json report = report_base("validate", cfg);
    report["checks"] = json::array();
    for (const auto& c : checks)
      report["checks"].push_back({{"name", c.name}, {"condition", c.condition}, {"margin", c.margin},
                                  {"satisfied", c.satisfied}, {"hard", c.hard}});
    report["ok"] = ok;
    emit_json(cfg, report);
  } else {
    Sink sink(cfg.output.path);
    auto& os = sink.out();
    os << "name,condition,margin,satisfied,hard\n";
    for (const auto& c : checks)
      os << c.name << ",\"" << c.condition << "\"," << c.margin << ',' << (c.satisfied ? "true" : "false") << ','
         << (c.hard ? "true" : "false") << '\n';
    sink.finish();
    write_sidecar(cfg);
  }
  if (!ok) {
    std::cerr << "assumption violated:";
    for (const auto& c : checks)
      if (c.hard && !c.satisfied) std::cerr << ' ' << c.name << " (" << c.condition << ')';
    std::cerr << '\n';
    return kAssumption;
  }
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::size_t n_paths, double y) {
  MarketParams p = cfg.market;
  p.y0 = y;
  const PolicyCoefficients coeffs = coefficients(p, cfg.model);
  const bool as_json = cfg.output.format == OutputFormat::json;
  Sink sink(cfg.output.path);
  auto& os = sink.out();
  json report;
  if (as_json) {
    report = report_base("simulate", cfg);
    report["y"] = y;
    report["paths"] = json::array();
  } else {
    os << "path,t,price,base_inventory,control,inventory\n";
  }
  for (std::size_t i = 0; i < n_paths; ++i) {
    const PricePath path = simulate_path(cfg.model, cfg.mc.horizon, cfg.mc.dt, cfg.mc.seed, i);
    const ProcurementPath proc = optimal_control_path(path, coeffs, p);
    if (as_json) {
      report["paths"].push_back({{"path", i},
                                 {"t", path.grid},
                                 {"price", path.values},
                                 {"base_inventory", proc.base_inventory},
                                 {"control", proc.control},
                                 {"inventory", proc.inventory}});
      continue;
    }
    for (std::size_t k = 0; k < path.grid.size(); ++k)
      os << i << ',' << path.grid[k] << ',' << path.values[k] << ',' << proc.base_inventory[k] << ','
         << proc.control[k] << ',' << proc.inventory[k] << '\n';
  }
  if (as_json) os << report.dump(2) << '\n';
  sink.finish();
  if (!as_json) write_sidecar(cfg);
  return kOk;
}

ValueMethod parse_method(const std::string& s) {
  if (s == "direct") return ValueMethod::direct;
  if (s == "representation") return ValueMethod::representation;
  return ValueMethod::raw;
}

int cmd_value(const RunConfig& cfg, const std::vector<std::string>& methods, double y, bool tilted) {
  const auto& p = cfg.market;
  const PolicyCoefficients coeffs = coefficients(p, cfg.model);
  check_horizon(cfg.mc, p.beta(), coeffs.delta);
  ValueOptions opts;
  if (tilted) opts.measure = MeasureMode::tilted;

  std::vector<ValueReport> reports;
  std::vector<std::pair<std::string, Estimate>> differences;
  const bool all = methods.size() > 1 || methods.front() == "all";
  if (all) {
    const ValueComparison cmp = estimate_value_all(p, cfg.model, coeffs, y, cfg.mc, opts);
    reports = {cmp.direct, cmp.representation, cmp.raw};
    differences = {{"direct-representation", cmp.direct_minus_representation},
                   {"direct-raw", cmp.direct_minus_raw},
                   {"representation-raw", cmp.representation_minus_raw}};
  } else {
    const ValueMethod m = parse_method(methods.front());
    if (m == ValueMethod::direct) reports.push_back(estimate_value_direct(p, cfg.model, coeffs, y, cfg.mc, opts));
    if (m == ValueMethod::representation)
      reports.push_back(estimate_value_representation(p, cfg.model, coeffs, y, cfg.mc, opts));
    if (m == ValueMethod::raw) reports.push_back(estimate_value_raw(p, cfg.model, coeffs, y, cfg.mc, opts));
  }
  if (all && methods.front() != "all") {
    std::vector<ValueReport> keep;
    for (const auto& r : reports)
      for (const auto& m : methods)
        if (to_string(r.method) == m) keep.push_back(r);
    reports = keep;
  }

  const double shift = decomposition_constant(p, coeffs.delta);
  const json constants = constants_json(cfg);
  if (cfg.output.format == OutputFormat::json) {
    json report = report_base("value", cfg);
    report["y"] = y;
    report["measure"] = tilted ? "tilted" : "likelihood_ratio";
    report["decomposition_constant"] = shift;
    report["estimates"] = json::array();
    for (const auto& r : reports)
      report["estimates"].push_back({{"method", to_string(r.method)}, {"W", estimate_json(r.W)}, {"V", estimate_json(r.V)}});
    report["differences"] = json::array();
    for (const auto& [name, d] : differences)
      report["differences"].push_back({{"pair", name}, {"W", estimate_json(d)}, {"z", -d.z_score(0.0)}});
    emit_json(cfg, report);
    return kOk;
  }
  Sink sink(cfg.output.path);
  auto& os = sink.out();
  os << "method,y,W,W_se,W_ci_low,W_ci_high,V,V_se,V_ci_low,V_ci_high,n,seed,decomposition_constant";
  write_csv_constants_header(os, constants);
  os << '\n';
  for (const auto& r : reports) {
    os << to_string(r.method) << ',' << y << ',' << r.W.mean << ',' << r.W.std_error << ',' << r.W.ci_low << ','
       << r.W.ci_high << ',' << r.V.mean << ',' << r.V.std_error << ',' << r.V.ci_low << ',' << r.V.ci_high << ','
       << r.W.n << ',' << r.W.seed << ',' << shift;
    write_csv_constants_row(os, constants);
    os << '\n';
  }
  sink.finish();
  write_sidecar(cfg);
  for (const auto& [name, d] : differences)
    std::cerr << name << ": " << d.mean << " (SE " << d.std_error << ", z " << -d.z_score(0.0) << ")\n";
  return kOk;
}

int cmd_foc(const RunConfig& cfg, const std::vector<double>& probes) {
  const auto& p = cfg.market;
  const PolicyCoefficients coeffs = coefficients(p, cfg.model);
  check_horizon(cfg.mc, p.beta(), coeffs.delta);
  const double l0 = base_inventory(1.0, coeffs, p.gamma);
  const json constants = constants_json(cfg);
  std::vector<Estimate> est;
  for (const double y : probes) est.push_back(backward_residual(p, cfg.model, coeffs, y, cfg.mc));

  if (cfg.output.format == OutputFormat::json) {
    json report = report_base("foc", cfg);
    report["base_inventory_0"] = l0;
    report["residuals"] = json::array();
    for (std::size_t i = 0; i < probes.size(); ++i)
      report["residuals"].push_back({{"y_probe", probes[i]}, {"residual", estimate_json(est[i])},
                                     {"z", -est[i].z_score(0.0)}});
    emit_json(cfg, report);
    return kOk;
  }
  Sink sink(cfg.output.path);
  auto& os = sink.out();
  os << "y_probe,residual,se,ci_low,ci_high,z,n,seed,base_inventory_0";
  write_csv_constants_header(os, constants);
  os << '\n';
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Estimate& e = est[i];
    os << probes[i] << ',' << e.mean << ',' << e.std_error << ',' << e.ci_low << ',' << e.ci_high << ','
       << -e.z_score(0.0) << ',' << e.n << ',' << e.seed << ',' << l0;
    write_csv_constants_row(os, constants);
    os << '\n';
  }
  sink.finish();
  write_sidecar(cfg);
  return kOk;
}

int cmd_kappa(const RunConfig& cfg) {
  const double beta = cfg.market.beta();
  const double xi = solve_xi(cfg.model, beta);
  const double k = kappa(cfg.model, beta);
  const Estimate mc = mc_kappa(cfg.model, beta, cfg.mc.n_paths, cfg.mc.dt, cfg.mc.seed, cfg.mc.threads);
  const double gap = mc.z_score(k);
  const double residual = std::isfinite(xi) ? laplace_exponent(cfg.model, xi) - beta : 0.0;

  if (cfg.output.format == OutputFormat::json) {
    json report = report_base("kappa", cfg);
    report["beta"] = beta;
    report["xi"] = std::isfinite(xi) ? json(xi) : json("inf");
    report["root_residual"] = residual;
    report["kappa_formula"] = k;
    report["kappa_mc"] = estimate_json(mc);
    report["gap_se"] = -gap;
    emit_json(cfg, report);
    return kOk;
  }
  Sink sink(cfg.output.path);
  sink.out() << "beta,xi,root_residual,kappa_formula,kappa_mc,se,ci_low,ci_high,gap_se,n,seed,dt\n"
             << beta << ',' << xi << ',' << residual << ',' << k << ',' << mc.mean << ',' << mc.std_error << ','
             << mc.ci_low << ',' << mc.ci_high << ',' << -gap << ',' << mc.n << ',' << mc.seed << ','
             << cfg.mc.dt << '\n';
  sink.finish();
  write_sidecar(cfg);
  return kOk;
}

int cmd_newsvendor(const RunConfig& cfg, bool compare) {
  const auto& p = cfg.market;
  std::optional<ValueReport> v0;
  if (compare) {
    MarketParams at_zero = p;
    at_zero.y0 = 0.0;
    const PolicyCoefficients coeffs = coefficients(at_zero, cfg.model);
    check_horizon(cfg.mc, p.beta(), coeffs.delta);
    v0 = estimate_value_representation(at_zero, cfg.model, coeffs, 0.0, cfg.mc);
  }
  const NewsvendorReport nv = newsvendor(p, cfg.model, v0 ? std::optional<double>(v0->V.mean) : std::nullopt);
  const double stationarity = newsvendor_L_prime(nv.y_star, p, cfg.model);

  if (cfg.output.format == OutputFormat::json) {
    json report = report_base("newsvendor", cfg);
    report["discounted_price"] = nv.discounted_price;
    report["discount"] = nv.discount;
    report["eta"] = nv.eta;
    report["y_star"] = nv.y_star;
    report["L_star"] = nv.L_star;
    report["stationarity_residual"] = stationarity;
    if (v0) {
      report["V0"] = estimate_json(v0->V);
      report["difference"] = *nv.comparison;
    }
    emit_json(cfg, report);
    return kOk;
  }
  Sink sink(cfg.output.path);
  auto& os = sink.out();
  os << "discounted_price,discount,eta,y_star,L_star,stationarity_residual,V0,V0_se,difference\n"
     << nv.discounted_price << ',' << nv.discount << ',' << nv.eta << ',' << nv.y_star << ',' << nv.L_star << ','
     << stationarity << ',';
  if (v0)
    os << v0->V.mean << ',' << v0->V.std_error << ',' << *nv.comparison << '\n';
  else
    os << ",,\n";
  sink.finish();
  write_sidecar(cfg);
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& grid) {
  const double mu = std::visit([](const auto& m) { return m.mu; }, cfg.model);
  const auto rows = sweep_sigma(cfg.market, mu, grid, cfg.mc);

  std::vector<double> sig, diff;
  for (const auto& r : rows)
    if (!r.skipped) {
      sig.push_back(r.sigma);
      diff.push_back(r.difference);
    }
  const double rho = sig.size() >= 2 ? spearman(sig, diff) : std::numeric_limits<double>::quiet_NaN();

  if (cfg.output.format == OutputFormat::json) {
    json report = report_base("sweep", cfg);
    report["mu"] = mu;
    report["spearman"] = std::isfinite(rho) ? json(rho) : json(nullptr);
    report["rows"] = json::array();
    for (const auto& r : rows) {
      json row = {{"sigma", r.sigma}, {"skipped", r.skipped}};
      if (r.skipped) {
        row["note"] = r.note;
      } else {
        row["kappa"] = r.coeffs.kappa;
        row["a"] = r.coeffs.a;
        row["b"] = r.coeffs.b;
        row["V0"] = estimate_json(r.V0);
        row["L_star"] = r.L_star;
        row["difference"] = r.difference;
      }
      report["rows"].push_back(row);
    }
    emit_json(cfg, report);
    return kOk;
  }
  Sink sink(cfg.output.path);
  auto& os = sink.out();
  os << "sigma,skipped,kappa,a,b,V0,V0_se,V0_ci_low,V0_ci_high,L_star,difference,n,seed\n";
  for (const auto& r : rows) {
    if (r.skipped) {
      os << r.sigma << ",true,,,,,,,,,,,\n";
      std::cerr << "sigma " << r.sigma << " skipped: " << r.note << '\n';
      continue;
    }
    os << r.sigma << ",false," << r.coeffs.kappa << ',' << r.coeffs.a << ',' << r.coeffs.b << ',' << r.V0.mean
       << ',' << r.V0.std_error << ',' << r.V0.ci_low << ',' << r.V0.ci_high << ',' << r.L_star << ','
       << r.difference << ',' << r.V0.n << ',' << r.V0.seed << '\n';
  }
  sink.finish();
  write_sidecar(cfg);
  std::cerr << "spearman(sigma, difference) = " << rho << '\n';
  return kOk;
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--format", o.format, "csv or json");
  app->add_option("-o,--output", o.output, "output path, - for stdout");
  app->add_option("--r", o.r);
  app->add_option("--lambda", o.lambda);
  app->add_option("--epsilon", o.epsilon);
  app->add_option("--gamma", o.gamma);
  app->add_option("--c", o.c);
  app->add_option("--alpha", o.alpha);
  app->add_option("--alpha-p", o.alpha_p);
  app->add_option("--alpha-s", o.alpha_s);
  app->add_option("--y0", o.y0);
  app->add_option("--model", o.model, "gbm, jump_diffusion or deterministic");
  app->add_option("--mu", o.mu);
  app->add_option("--sigma", o.sigma);
  app->add_option("--psi", o.psi);
  app->add_option("--ell", o.ell);
  app->add_option("--n-paths", o.n_paths);
  app->add_option("--horizon", o.horizon);
  app->add_option("--dt", o.dt);
  app->add_option("--seed", o.seed);
  app->add_option("--threads", o.threads, "worker threads; 1 is the bit-exact reference");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--sigma-grid: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--sigma-grid: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal spot-market procurement under exponential Levy prices"};
  app.require_subcommand(1);
  Overrides o;

  auto* validate_cmd = app.add_subcommand("validate", "check the standing assumptions");
  auto* simulate_cmd = app.add_subcommand("simulate", "price paths with the optimal procurement policy");
  auto* value_cmd = app.add_subcommand("value", "Monte Carlo value of the optimal policy");
  auto* foc_cmd = app.add_subcommand("foc", "backward-equation residual of the policy");
  auto* kappa_cmd = app.add_subcommand("kappa", "closed-form and Monte Carlo kappa");
  auto* nv_cmd = app.add_subcommand("newsvendor", "single-order benchmark");
  auto* sweep_cmd = app.add_subcommand("sweep", "value against the newsvendor over a volatility grid");
  for (auto* sub : {validate_cmd, simulate_cmd, value_cmd, foc_cmd, kappa_cmd, nv_cmd, sweep_cmd}) add_common(sub, o);

  std::size_t sim_paths = 1;
  std::optional<double> y;
  simulate_cmd->add_option("--paths", sim_paths, "number of paths")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--y", y, "initial inventory (default market.y0)");

  std::vector<std::string> methods{"all"};
  bool tilted = false;
  value_cmd->add_option("--method", methods, "direct, representation, raw or all (repeatable)")
      ->check(CLI::IsMember({"direct", "representation", "raw", "all"}));
  value_cmd->add_option("--y", y, "initial inventory (default market.y0)");
  value_cmd->add_flag("--tilted", tilted, "simulate the price-weighted measure directly");

  std::vector<double> probes;
  foc_cmd->add_option("--y-probe", probes, "inventory level(s) to probe (default market.y0)");

  bool compare = false;
  nv_cmd->add_flag("--compare", compare, "also estimate V(0) and report V(0) - L(y*)");

  std::string sigma_grid = "0.05,0.1,0.2,0.5,1,2,5";
  sweep_cmd->add_option("--sigma-grid", sigma_grid, "comma-separated volatilities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig cfg = resolve(o);
    const double y_used = y.value_or(cfg.market.y0);
    if (*validate_cmd) return cmd_validate(cfg);
    if (*simulate_cmd) return cmd_simulate(cfg, sim_paths, y_used);
    if (*value_cmd) return cmd_value(cfg, methods, y_used, tilted);
    if (*foc_cmd) return cmd_foc(cfg, probes.empty() ? std::vector<double>{cfg.market.y0} : probes);
    if (*kappa_cmd) return cmd_kappa(cfg);
    if (*nv_cmd) return cmd_newsvendor(cfg, compare);
    if (*sweep_cmd) return cmd_sweep(cfg, parse_list(sigma_grid));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const AssumptionError& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return kAssumption;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
