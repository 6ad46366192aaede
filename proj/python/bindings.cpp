#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "levy_procure/config.hpp"
#include "levy_procure/errors.hpp"
#include "levy_procure/estimators.hpp"
#include "levy_procure/levy_price.hpp"
#include "levy_procure/payoff.hpp"
#include "levy_procure/policy.hpp"

namespace py = pybind11;
using namespace levy_procure;

namespace {

McConfig make_mc(std::size_t n_paths, double horizon, double dt, std::uint64_t seed, unsigned threads) {
  McConfig mc;
  mc.n_paths = n_paths;
  mc.horizon = horizon;
  mc.dt = dt;
  mc.seed = seed;
  mc.threads = threads;
  return mc;
}

ValueMethod parse_method(const std::string& s) {
  if (s == "direct") return ValueMethod::direct;
  if (s == "representation") return ValueMethod::representation;
  if (s == "raw") return ValueMethod::raw;
  throw DomainError("method must be direct, representation or raw");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimal spot-market procurement under exponential Levy prices";

  auto domain_error = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)domain_error;

  py::class_<GeometricBrownian>(m, "GeometricBrownian")
      .def(py::init([](double mu, double sigma) { return GeometricBrownian{mu, sigma}; }), py::arg("mu"),
           py::arg("sigma"))
      .def_readwrite("mu", &GeometricBrownian::mu)
      .def_readwrite("sigma", &GeometricBrownian::sigma)
      .def("__repr__", [](const GeometricBrownian& g) {
        return "GeometricBrownian(mu=" + std::to_string(g.mu) + ", sigma=" + std::to_string(g.sigma) + ")";
      });
  py::class_<JumpDiffusion>(m, "JumpDiffusion")
      .def(py::init([](double mu, double sigma, double psi, double ell) { return JumpDiffusion{mu, sigma, psi, ell}; }),
           py::arg("mu"), py::arg("sigma"), py::arg("psi"), py::arg("ell"))
      .def_readwrite("mu", &JumpDiffusion::mu)
      .def_readwrite("sigma", &JumpDiffusion::sigma)
      .def_readwrite("psi", &JumpDiffusion::psi)
      .def_readwrite("ell", &JumpDiffusion::ell);
  py::class_<Deterministic>(m, "Deterministic")
      .def(py::init([](double mu) { return Deterministic{mu}; }), py::arg("mu"))
      .def_readwrite("mu", &Deterministic::mu);

  py::class_<MarketParams>(m, "MarketParams")
      .def(py::init([](double r, double lambda, double epsilon, double gamma, double c, double alpha, double alpha_p,
                       double alpha_s, double y0) {
             return MarketParams{r, lambda, epsilon, gamma, c, alpha, alpha_p, alpha_s, y0};
           }),
           py::arg("r") = 0.05, py::arg("lambda_") = 5.0, py::arg("epsilon") = 0.0, py::arg("gamma") = 0.05,
           py::arg("c") = 1.0, py::arg("alpha") = 1.2, py::arg("alpha_p") = 0.8, py::arg("alpha_s") = 0.7,
           py::arg("y0") = 0.0)
      .def_readwrite("r", &MarketParams::r)
      .def_readwrite("lambda_", &MarketParams::lambda)
      .def_readwrite("epsilon", &MarketParams::epsilon)
      .def_readwrite("gamma", &MarketParams::gamma)
      .def_readwrite("c", &MarketParams::c)
      .def_readwrite("alpha", &MarketParams::alpha)
      .def_readwrite("alpha_p", &MarketParams::alpha_p)
      .def_readwrite("alpha_s", &MarketParams::alpha_s)
      .def_readwrite("y0", &MarketParams::y0)
      .def_property_readonly("beta", &MarketParams::beta);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("mean", &Estimate::mean)
      .def_readonly("std_error", &Estimate::std_error)
      .def_readonly("n", &Estimate::n)
      .def_readonly("ci_low", &Estimate::ci_low)
      .def_readonly("ci_high", &Estimate::ci_high)
      .def_readonly("seed", &Estimate::seed)
      .def("z_score", &Estimate::z_score)
      .def("__repr__", [](const Estimate& e) {
        return "Estimate(mean=" + std::to_string(e.mean) + ", std_error=" + std::to_string(e.std_error) + ")";
      });

  py::class_<PolicyCoefficients>(m, "PolicyCoefficients")
      .def_readonly("xi", &PolicyCoefficients::xi)
      .def_readonly("kappa", &PolicyCoefficients::kappa)
      .def_readonly("a", &PolicyCoefficients::a)
      .def_readonly("b", &PolicyCoefficients::b)
      .def_readonly("beta", &PolicyCoefficients::beta)
      .def_readonly("delta", &PolicyCoefficients::delta)
      .def_readonly("gamma", &PolicyCoefficients::gamma)
      .def("base_inventory_cap", &PolicyCoefficients::base_inventory_cap);

  py::class_<AssumptionCheck>(m, "AssumptionCheck")
      .def_readonly("name", &AssumptionCheck::name)
      .def_readonly("condition", &AssumptionCheck::condition)
      .def_readonly("margin", &AssumptionCheck::margin)
      .def_readonly("satisfied", &AssumptionCheck::satisfied)
      .def_readonly("hard", &AssumptionCheck::hard);

  py::class_<NewsvendorReport>(m, "NewsvendorReport")
      .def_readonly("discounted_price", &NewsvendorReport::discounted_price)
      .def_readonly("discount", &NewsvendorReport::discount)
      .def_readonly("eta", &NewsvendorReport::eta)
      .def_readonly("y_star", &NewsvendorReport::y_star)
      .def_readonly("L_star", &NewsvendorReport::L_star)
      .def_readonly("comparison", &NewsvendorReport::comparison);

  py::class_<ValueReport>(m, "ValueReport")
      .def_property_readonly("method", [](const ValueReport& r) { return to_string(r.method); })
      .def_readonly("W", &ValueReport::W)
      .def_readonly("V", &ValueReport::V);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("sigma", &SweepRow::sigma)
      .def_readonly("skipped", &SweepRow::skipped)
      .def_readonly("note", &SweepRow::note)
      .def_readonly("coeffs", &SweepRow::coeffs)
      .def_readonly("V0", &SweepRow::V0)
      .def_readonly("L_star", &SweepRow::L_star)
      .def_readonly("difference", &SweepRow::difference);

  m.def("laplace_exponent", &laplace_exponent, py::arg("model"), py::arg("u"));
  m.def("effective_delta", &effective_delta, py::arg("model"));
  m.def("solve_xi", &solve_xi, py::arg("model"), py::arg("beta"));
  m.def("kappa", &kappa, py::arg("model"), py::arg("beta"));
  m.def("coefficients", &coefficients, py::arg("market"), py::arg("model"));
  m.def("base_inventory", &base_inventory, py::arg("price"), py::arg("coeffs"), py::arg("gamma"));
  m.def("no_invest", &no_invest, py::arg("market"), py::arg("delta"));

  m.def("H", &H, py::arg("y"), py::arg("market"));
  m.def("H_prime", &H_prime, py::arg("y"), py::arg("market"));
  m.def("expected_revenue", &expected_revenue, py::arg("y"), py::arg("market"));
  m.def("validate", &validate, py::arg("market"), py::arg("model"));

  m.def(
      "simulate",
      [](const MarketParams& p, const PriceModel& model, double horizon, double dt, std::uint64_t seed,
         std::uint64_t path_index) {
        const PricePath path = simulate_path(model, horizon, dt, seed, path_index);
        const ProcurementPath proc = optimal_control_path(path, coefficients(p, model), p);
        py::dict out;
        out["t"] = path.grid;
        out["price"] = path.values;
        out["base_inventory"] = proc.base_inventory;
        out["control"] = proc.control;
        out["inventory"] = proc.inventory;
        return out;
      },
      py::arg("market"), py::arg("model"), py::arg("horizon") = 4.0, py::arg("dt") = 1e-3, py::arg("seed") = 20240601,
      py::arg("path_index") = 0, "one price path with the optimal policy, as a dict of lists");

  m.def(
      "estimate_value",
      [](const MarketParams& p, const PriceModel& model, double y, const std::string& method, std::size_t n_paths,
         double horizon, double dt, std::uint64_t seed, unsigned threads) {
        const McConfig mc = make_mc(n_paths, horizon, dt, seed, threads);
        const PolicyCoefficients c = coefficients(p, model);
        switch (parse_method(method)) {
          case ValueMethod::direct: return estimate_value_direct(p, model, c, y, mc);
          case ValueMethod::representation: return estimate_value_representation(p, model, c, y, mc);
          case ValueMethod::raw: return estimate_value_raw(p, model, c, y, mc);
        }
        throw DomainError("unknown method");
      },
      py::arg("market"), py::arg("model"), py::arg("y") = 0.0, py::arg("method") = "representation",
      py::arg("n_paths") = 100000, py::arg("horizon") = 4.0, py::arg("dt") = 1e-3, py::arg("seed") = 20240601,
      py::arg("threads") = 1);

  m.def(
      "backward_residual",
      [](const MarketParams& p, const PriceModel& model, double y_probe, std::size_t n_paths, double horizon, double dt,
         std::uint64_t seed, unsigned threads) {
        return backward_residual(p, model, coefficients(p, model), y_probe, make_mc(n_paths, horizon, dt, seed, threads));
      },
      py::arg("market"), py::arg("model"), py::arg("y_probe") = 0.0, py::arg("n_paths") = 100000,
      py::arg("horizon") = 4.0, py::arg("dt") = 1e-3, py::arg("seed") = 20240601, py::arg("threads") = 1);

  m.def("mc_kappa", &mc_kappa, py::arg("model"), py::arg("beta"), py::arg("n_paths") = 200000, py::arg("dt") = 1e-3,
        py::arg("seed") = 20240601, py::arg("threads") = 1);

  m.def("newsvendor", &newsvendor, py::arg("market"), py::arg("model"), py::arg("value_at_zero") = py::none());
  m.def("newsvendor_L", &newsvendor_L, py::arg("y"), py::arg("market"), py::arg("model"));

  m.def(
      "sweep_sigma",
      [](const MarketParams& p, double mu, const std::vector<double>& grid, std::size_t n_paths, double horizon,
         double dt, std::uint64_t seed, unsigned threads) {
        return sweep_sigma(p, mu, grid, make_mc(n_paths, horizon, dt, seed, threads));
      },
      py::arg("market"), py::arg("mu"), py::arg("sigma_grid"), py::arg("n_paths") = 50000, py::arg("horizon") = 4.0,
      py::arg("dt") = 1e-3, py::arg("seed") = 20240601, py::arg("threads") = 1);
}
