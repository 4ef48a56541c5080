#include "misbelief/errors.hpp"
#include "misbelief/extensions.hpp"
#include "misbelief/gaussian.hpp"
#include "misbelief/limit_solver.hpp"
#include "misbelief/scenario_file.hpp"
#include "misbelief/simulate.hpp"
#include "misbelief/society.hpp"
#include "misbelief/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace misbelief;

namespace {

std::string case_name(LimitCase c) { return c == LimitCase::I ? "I" : c == LimitCase::II ? "II" : "III"; }

std::vector<std::string> tag_names(const std::vector<BiasTag>& tags) {
  std::vector<std::string> out;
  for (BiasTag t : tags) out.emplace_back(to_string(t));
  return out;
}

py::dict corollary_dict(const CorollaryCheck& c) {
  py::dict d;
  d["name"] = c.name;
  d["applicable"] = c.applicable;
  d["reason"] = c.reason;
  d["margin"] = c.margin;
  d["passed"] = c.passed;
  d["detail"] = c.detail;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Limit beliefs of learners with a dogmatic, overconfident prior";
  m.attr("__version__") = MISBELIEF_VERSION;

  // messages start with the error kind, e.g. "InvalidModel: Sigma is not positive definite"
  py::register_exception<Error>(m, "MisbeliefError", PyExc_ValueError);

  py::class_<LinearGaussianModel>(m, "LinearGaussianModel")
      .def(py::init<Matrix, Matrix>(), py::arg("design"), py::arg("sigma"))
      .def_property_readonly("design", &LinearGaussianModel::design)
      .def_property_readonly("sigma", &LinearGaussianModel::sigma)
      .def_property_readonly("signal_dim", &LinearGaussianModel::signal_dim)
      .def_property_readonly("fundamental_dim", &LinearGaussianModel::fundamental_dim);

  py::class_<DogmaticConstraint>(m, "DogmaticConstraint")
      .def_static("case1", &DogmaticConstraint::case1, py::arg("pinned_index"), py::arg("pinned_value"),
                  py::arg("fixed_sigma"))
      .def_static("case2", &DogmaticConstraint::case2, py::arg("pinned_vector"))
      .def_static("case3", &DogmaticConstraint::case3, py::arg("pinned_index"), py::arg("pinned_value"))
      .def_property_readonly("limit_case", [](const DogmaticConstraint& c) { return case_name(c.limit_case()); })
      .def_property_readonly("pinned_index", &DogmaticConstraint::pinned_index)
      .def_property_readonly("pinned_value", &DogmaticConstraint::pinned_value);

  py::class_<LimitBelief>(m, "LimitBelief")
      .def_readonly("f_tilde", &LimitBelief::f_tilde)
      .def_readonly("sigma_tilde", &LimitBelief::sigma_tilde);

  m.def("solve_limit", &solve_limit, py::arg("model"), py::arg("true_f"), py::arg("constraint"),
        "Closed-form concentration point for any of the three constraint types.");
  m.def(
      "numeric_oracle",
      [](const LinearGaussianModel& model, const Vector& f, const DogmaticConstraint& c, int starts,
         std::uint64_t seed) {
        OracleOptions o;
        o.starts = starts;
        o.seed = seed;
        const OracleResult r = numeric_oracle(model, f, c, o);
        return py::make_tuple(r.belief, r.objective, r.gradient_norm);
      },
      py::arg("model"), py::arg("true_f"), py::arg("constraint"), py::arg("starts") = 5, py::arg("seed") = 0x5eed,
      "Numerical KL minimization; returns (belief, objective, gradient_norm).");
  m.def("kl_divergence", &kl_divergence, py::arg("true_f"), py::arg("true_model"), py::arg("cand_f"),
        py::arg("cand_model"));
  m.def("kl_at", &kl_at, py::arg("model"), py::arg("true_f"), py::arg("belief"));
  m.def(
      "sample_signals",
      [](const LinearGaussianModel& model, const Vector& f, std::size_t t, std::uint64_t seed) {
        return sample_signals(model, f, t, seed).rows;
      },
      py::arg("model"), py::arg("f"), py::arg("t"), py::arg("seed"), "T x D matrix of sampled signals.");

  py::class_<Scenario>(m, "Scenario")
      .def(py::init([](MembershipMatrix c, Vector a, Vector theta, Vector v_q, Vector v_eta, Eigen::Index agent,
                       double a_tilde) {
             Scenario s{std::move(c), std::move(a), std::move(theta), std::move(v_q), std::move(v_eta), agent, a_tilde};
             s.validate();
             return s;
           }),
           py::arg("memberships"), py::arg("calibers"), py::arg("discrimination"), py::arg("v_q"), py::arg("v_eta"),
           py::arg("agent"), py::arg("a_tilde"))
      .def_readonly("memberships", &Scenario::memberships)
      .def_readonly("calibers", &Scenario::calibers)
      .def_readonly("discrimination", &Scenario::discrimination)
      .def_readonly("v_q", &Scenario::v_q)
      .def_readonly("v_eta", &Scenario::v_eta)
      .def_readonly("agent", &Scenario::agent)
      .def_readonly("a_tilde", &Scenario::a_tilde)
      .def_property_readonly("overconfidence", &Scenario::overconfidence)
      .def("with_agent", &Scenario::with_agent, py::arg("agent"), py::arg("a_tilde"));

  py::class_<BiasReport>(m, "BiasReport")
      .def_readonly("theta_bias", &BiasReport::theta_bias)
      .def_readonly("caliber_bias", &BiasReport::caliber_bias)
      .def_readonly("sigma_bias", &BiasReport::sigma_bias)
      .def_property_readonly("classifications", [](const BiasReport& r) { return tag_names(r.classifications); });

  m.def("biases_closed_form", &biases_closed_form, py::arg("scenario"));
  m.def("biases_via_theorem", &biases_via_theorem, py::arg("scenario"));
  m.def("add_group", &add_group, py::arg("scenario"), py::arg("memberships"), py::arg("v_eta_new"));
  m.def(
      "corollary_checks",
      [](const Scenario& s) {
        py::list out;
        for (const auto& c : corollary_checks(s).checks) out.append(corollary_dict(c));
        return out;
      },
      py::arg("scenario"));

  m.def(
      "correlated_biases",
      [](const Matrix& sigma_q, const Vector& calibers, Eigen::Index agent, double a_tilde) {
        const CorrelatedReport r = correlated_biases(CorrelatedScenario{sigma_q, calibers, agent, a_tilde});
        std::vector<std::string> tags;
        for (GroupTag t : r.tags) tags.emplace_back(to_string(t));
        return py::make_tuple(r.caliber_bias, r.sigma_bias, tags);
      },
      py::arg("sigma_q"), py::arg("calibers"), py::arg("agent"), py::arg("a_tilde"),
      "Returns (caliber_bias, sigma_bias, group_tags).");
  m.def(
      "contact_biases",
      [](const MembershipVector& signs, double v_q, double v_a, double v_eta, Eigen::Index agent,
         double overconfidence) {
        ContactScenario ks;
        ks.signs = signs;
        ks.v_q = v_q;
        ks.v_a = v_a;
        ks.v_eta = v_eta;
        ks.calibers = Vector::Zero(signs.size());
        ks.agent = agent;
        ks.a_tilde = overconfidence;
        const ContactReport r = contact_biases(ks);
        return py::make_tuple(r.theta_bias, r.caliber_bias);
      },
      py::arg("signs"), py::arg("v_q"), py::arg("v_a"), py::arg("v_eta"), py::arg("agent"), py::arg("overconfidence"),
      "Returns (theta_bias, caliber_bias).");
  m.def(
      "example1_biases",
      [](double v_q_out, double v_a_out) {
        const RicherObservationRatios r = example1_biases(v_q_out, v_a_out);
        return py::make_tuple(r.competitor_first, r.competitor_second, r.discrimination);
      },
      py::arg("v_q_out"), py::arg("v_a_out"), "Bias ratios (a3, a4, theta) per unit of overconfidence.");
  m.def(
      "example2_biases",
      [](double v_q_self, double v_eta, double overconfidence) {
        MultiAttributeScenario ms;
        ms.v_q_self = v_q_self;
        ms.v_eta = v_eta;
        ms.overconfidence = overconfidence;
        const MultiAttributeReport r = example2_biases(ms);
        return py::make_tuple(r.talent_other, r.morality_other, r.discrimination);
      },
      py::arg("v_q_self"), py::arg("v_eta"), py::arg("overconfidence"), "Biases (a2, m1, theta1).");

  m.def(
      "load_scenario",
      [](const std::string& path) {
        const ScenarioFile f = load_scenario_file(path);
        py::dict d;
        d["kind"] = std::string(to_string(f.kind));
        d["name"] = f.name;
        d["seed"] = f.seed;
        d["digest"] = f.digest;
        if (f.society) d["scenario"] = *f.society;
        return d;
      },
      py::arg("path"), "Parses a scenario file; society files include a Scenario under 'scenario'.");

  m.def(
      "convergence_trace",
      [](const LinearGaussianModel& model, const Vector& f, const DogmaticConstraint& c, std::uint64_t t_max,
         const std::vector<std::uint64_t>& checkpoints, std::uint64_t seed) {
        ConvergenceTrace trace;
        {
          py::gil_scoped_release release;
          trace = convergence_trace(model, f, c, t_max, checkpoints, seed);
        }
        py::list out;
        for (const auto& p : trace.checkpoints) out.append(py::make_tuple(p.t, p.distance, p.belief));
        return py::make_tuple(out, trace.limit);
      },
      py::arg("model"), py::arg("true_f"), py::arg("constraint"), py::arg("t_max"), py::arg("checkpoints"),
      py::arg("seed"), "Returns ([(t, distance, belief), ...], limit).");

  m.def(
      "run_suite",
      [](const std::string& suite, std::uint64_t seed, std::optional<std::size_t> trials) {
        VerifyOptions o;
        o.seed = seed;
        if (trials) {
          o.theorem1_instances = o.prop1_scenarios = o.corollary_scenarios = o.extension_scenarios = *trials;
          o.oracle_scenarios = std::min(o.oracle_scenarios, *trials);
        }
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          results = run_suite(suite, o);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["suite"] = r.suite;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["value"] = r.value;
          d["comparison"] = r.comparison;
          d["threshold"] = r.threshold;
          d["trials"] = r.trials;
          out.append(d);
        }
        return out;
      },
      py::arg("suite") = "all", py::arg("seed") = VerifyOptions{}.seed, py::arg("trials") = py::none());
}
