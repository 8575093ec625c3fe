#include "fairalloc/adversaries.hpp"
#include "fairalloc/algorithms.hpp"
#include "fairalloc/error.hpp"
#include "fairalloc/experiments.hpp"
#include "fairalloc/instance_io.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/oracle.hpp"
#include "fairalloc/report_io.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace fairalloc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("values must be a 2-d array (rounds x agents)");
  Matrix m(a.shape(0), a.shape(1));
  if (m.data().size()) std::memcpy(m.data().data(), a.data(), m.data().size() * sizeof(double));
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  if (m.data().size()) std::memcpy(a.mutable_data(), m.data().data(), m.data().size() * sizeof(double));
  return a;
}

py::dict run_dict(const PolicyRun& run) {
  py::dict d;
  d["winners"] = run.allocation.winners;
  d["utilities"] = run.final_utilities;
  d["utility_trajectory"] = to_array(run.utility_trajectory);
  if (run.avg_utility_trajectory) {
    d["ubar_trajectory"] = to_array(*run.avg_utility_trajectory);
    d["beta_trajectory"] = to_array(*run.multiplier_trajectory);
  }
  return d;
}

py::dict equilibrium_dict(const EquilibriumResult& eq) {
  py::dict d;
  d["fractions"] = to_array(eq.fractions);
  d["utilities"] = eq.utilities;
  d["prices"] = eq.prices;
  d["iterations"] = eq.iterations;
  d["kkt_residual"] = eq.kkt_residual;
  d["budget_error"] = eq.budget_error;
  return d;
}

PolicyConfig make_policy(const std::string& kind, double delta, std::optional<double> a,
                         std::optional<double> b, std::optional<double> ell, double r,
                         double budget) {
  const PolicyKind k = parse_policy_kind(kind);
  if (k == PolicyKind::seeded_greedy) return PolicyConfig::seeded(delta);
  if (k == PolicyKind::pace) {
    if (a && b) return PolicyConfig::pace(*a, *b);
    if (ell) return PolicyConfig::pace_rates(*ell, r, budget);
    throw Error(ErrorCode::InvalidProjection, "pace needs a and b, or ell");
  }
  PolicyConfig config;
  config.kind = k;
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Online fair allocation: greedy, seeded greedy and PACE with offline oracles.";

  static py::exception<Error> error(m, "FairallocError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<Instance>(m, "Instance")
      .def(py::init([](const Array& values, std::optional<std::vector<double>> weights,
                       std::optional<double> epsilon, std::optional<double> c) {
             Matrix v = to_matrix(values);
             std::vector<double> w = weights.value_or(std::vector<double>(v.cols(), 1.0));
             return build_instance(std::move(v), std::move(w), epsilon, c);
           }),
           py::arg("values"), py::arg("weights") = py::none(), py::arg("epsilon") = py::none(),
           py::arg("c") = py::none())
      .def_property_readonly("agents", &Instance::agents)
      .def_property_readonly("horizon", &Instance::horizon)
      .def_property_readonly("values", [](const Instance& x) { return to_array(x.values()); })
      .def_property_readonly("weights", [](const Instance& x) {
        return std::vector<double>(x.weights().begin(), x.weights().end());
      })
      .def_property_readonly("epsilon", &Instance::epsilon)
      .def_property_readonly("c", &Instance::c)
      .def_property_readonly("generator", [](const Instance& x) { return x.meta().generator; })
      .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; });

  m.def("infer_epsilon", [](const Instance& x) {
    const auto r = infer_epsilon(x);
    py::dict d;
    d["epsilon_inferred"] = r.epsilon_inferred;
    d["c_inferred"] = r.c_inferred;
    d["satisfies_assumption1"] = r.satisfies_assumption1;
    d["satisfies_assumption3"] = r.satisfies_assumption3;
    d["monopolistic_utilities"] = r.monopolistic_utilities;
    return d;
  });
  m.def("serialize_instance", &serialize_instance);
  m.def("parse_instance", [](const std::string& text) { return parse_instance(text); });

  m.def(
      "generate",
      [](const std::string& name, const std::map<std::string, double>& params, std::uint64_t seed) {
        return generate({name, params}, seed);
      },
      py::arg("name"), py::arg("params"), py::arg("seed") = 0);
  m.def("generator_names", [] {
    std::vector<std::string> names;
    for (auto n : generator_names()) names.emplace_back(n);
    return names;
  });

  py::class_<PolicyConfig>(m, "PolicyConfig")
      .def(py::init(&make_policy), py::arg("kind") = "greedy", py::arg("delta") = 1.0,
           py::arg("a") = py::none(), py::arg("b") = py::none(), py::arg("ell") = py::none(),
           py::arg("r") = 1.0, py::arg("budget") = 1.0)
      .def_property_readonly("kind", [](const PolicyConfig& p) { return std::string(to_string(p.kind)); })
      .def_readonly("delta", &PolicyConfig::delta)
      .def_readonly("a", &PolicyConfig::a)
      .def_readonly("b", &PolicyConfig::b);

  m.def("run_policy", [](const Instance& x, const PolicyConfig& p) {
    return run_dict(run_policy(x, p));
  });
  m.def("pace_ell_bound", &pace_ell_bound, py::arg("agents"), py::arg("epsilon"),
        py::arg("c") = py::none());

  m.def(
      "divisible_nw_optimum",
      [](const Instance& x, const std::string& method, double tol, std::size_t max_iters) {
        OracleOptions o;
        o.method = method == "proportional_response" ? OracleMethod::proportional_response
                                                     : OracleMethod::smoothed_newton;
        o.tol = tol;
        o.max_iters = max_iters;
        std::optional<EquilibriumResult> eq;
        {
          py::gil_scoped_release release;
          eq = divisible_nw_optimum(x, o);
        }
        return equilibrium_dict(*eq);
      },
      py::arg("instance"), py::arg("method") = "smoothed_newton", py::arg("tol") = 1e-9,
      py::arg("max_iters") = 100000);
  m.def("integral_nw_optimum", [](const Instance& x) {
    const auto opt = integral_nw_optimum(x);
    py::dict d;
    d["winners"] = opt.allocation.winners;
    d["utilities"] = opt.utilities;
    d["nash_welfare"] = opt.nash_welfare;
    return d;
  });

  m.def("envy_matrix", [](const Instance& x, const std::vector<std::size_t>& winners) {
    return to_array(envy_matrix(x, Allocation::integral(x.agents(), winners)).envy);
  });
  m.def("nash_welfare", [](const std::vector<double>& u, const std::vector<double>& w) {
    return nash_welfare(u, w);
  });
  m.def("competitive_ratio", [](const std::vector<double>& alg, const std::vector<double>& opt,
                                const std::vector<double>& w) { return competitive_ratio(alg, opt, w); });
  m.def("r_delta", [](const Instance& x, const std::vector<double>& u, double delta) {
    return r_delta(x, u, delta);
  });
  m.def("canonical_envy_bound", &canonical_envy_bound);
  m.def("envy_bound_finite_T", &envy_bound_finite_T);
  m.def("seeded_bound", &seeded_bound);

  m.def(
      "report_json",
      [](const Instance& x, const PolicyConfig& p, const std::string& oracle,
         std::optional<double> ell) {
        ReportConfig rc;
        rc.policy = p;
        rc.ell = ell;
        const auto run = run_policy(x, p);
        std::optional<EquilibriumResult> eq;
        std::optional<IntegralOptimum> integral;
        if (oracle == "divisible" || oracle == "both") eq = divisible_nw_optimum(x);
        if (oracle == "integral" || oracle == "both") integral = integral_nw_optimum(x);
        const auto report =
            build_report(x, run, {eq ? &*eq : nullptr, integral ? &*integral : nullptr}, rc);
        return serialize_report(report, {x.meta().generator, std::nullopt, "python"});
      },
      py::arg("instance"), py::arg("policy"), py::arg("oracle") = "divisible",
      py::arg("ell") = py::none());

  m.def(
      "run_criterion",
      [](int id) {
        ExperimentContext context;
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = run_criterion(id, context);
        }
        py::dict d;
        d["id"] = r.id;
        d["title"] = r.title;
        d["passed"] = r.passed;
        d["detail"] = r.detail;
        d["seconds"] = r.seconds;
        return d;
      },
      py::arg("id"));
}
