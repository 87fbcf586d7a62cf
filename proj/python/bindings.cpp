#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spotcheck/analytic.hpp"
#include "spotcheck/baselines.hpp"
#include "spotcheck/calibration.hpp"
#include "spotcheck/chsh_sim.hpp"
#include "spotcheck/optimizer.hpp"
#include "spotcheck/variants.hpp"

namespace py = pybind11;
using namespace spotcheck;

PYBIND11_MODULE(_spotcheck, m) {
    m.doc() = "Confidence bounds for spot-checking experiments";

    static py::exception<Error> error(m, "SpotcheckError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, (std::string(e.name()) + ": " + e.what()).c_str());
        }
    });

    py::class_<TrialRecord>(m, "TrialRecord")
        .def(py::init([](std::uint64_t i, int y, std::optional<double> x) {
                 TrialRecord r{i, y, x};
                 r.validate();
                 return r;
             }),
             py::arg("index"), py::arg("y"), py::arg("x") = py::none())
        .def_readonly("index", &TrialRecord::index)
        .def_readonly("y", &TrialRecord::y)
        .def_readonly("x", &TrialRecord::x);

    py::class_<ExtremalEF>(m, "ExtremalEF")
        .def(py::init([](double beta, double t, double omega, double b) {
                 ExtremalEF ef{beta, t, omega, b};
                 ef.validate();
                 return ef;
             }),
             py::arg("beta"), py::arg("t"), py::arg("omega"), py::arg("b") = 0.0)
        .def_static("from_shifted", &ExtremalEF::from_shifted)
        .def_readonly("beta", &ExtremalEF::beta)
        .def_readonly("t", &ExtremalEF::t)
        .def_readonly("omega", &ExtremalEF::omega)
        .def_readonly("b", &ExtremalEF::b)
        .def("shifted_t", &ExtremalEF::shifted_t)
        .def("__repr__", [](const ExtremalEF& ef) {
            return "ExtremalEF(beta=" + std::to_string(ef.beta) + ", t=" + std::to_string(ef.t) +
                   ", omega=" + std::to_string(ef.omega) + ", b=" + std::to_string(ef.b) + ")";
        });

    py::class_<ReferenceDistribution>(m, "ReferenceDistribution")
        .def(py::init(&ReferenceDistribution::from_pairs), py::arg("pairs"))
        .def_static("point_mass", &ReferenceDistribution::point_mass)
        .def_static("empirical", &ReferenceDistribution::empirical)
        .def_property_readonly("support", &ReferenceDistribution::support)
        .def("mean", &ReferenceDistribution::mean)
        .def("variance", &ReferenceDistribution::variance)
        .def("shifted", &ReferenceDistribution::shifted);

    py::class_<ConfidenceReport>(m, "ConfidenceReport")
        .def_readonly("s_lb", &ConfidenceReport::s_lb)
        .def_readonly("c_n", &ConfidenceReport::c_n)
        .def_readonly("average_lb", &ConfidenceReport::average_lb)
        .def_readonly("log_ef_sum", &ConfidenceReport::log_ef_sum)
        .def_readonly("beta", &ConfidenceReport::beta)
        .def_readonly("epsilon", &ConfidenceReport::epsilon)
        .def_readonly("zero_factor", &ConfidenceReport::zero_factor);

    m.def("ef_value", &ef_value, py::arg("ef"), py::arg("x"), py::arg("y"));
    m.def("confidence_bound",
          py::overload_cast<const std::vector<TrialRecord>&, const ExtremalEF&, double>(&confidence_bound),
          py::arg("records"), py::arg("ef"), py::arg("epsilon"));
    m.def("ef_inequality_lhs", &ef_inequality_lhs, py::arg("ef"), py::arg("dist"), py::arg("omega"));

    py::class_<OptResult>(m, "OptResult")
        .def_readonly("beta", &OptResult::beta)
        .def_readonly("t", &OptResult::t)
        .def_readonly("objective", &OptResult::objective)
        .def_readonly("converged", &OptResult::converged);
    m.def(
        "optimize_ef",
        [](const ReferenceDistribution& dist, double omega, double epsilon, double n, bool strict) {
            return optimize_ef(ObjectiveContext{dist, omega, epsilon, n}, strict);
        },
        py::arg("dist"), py::arg("omega"), py::arg("epsilon"), py::arg("n"), py::arg("strict") = false);
    m.def(
        "min_trials",
        [](const ReferenceDistribution& dist, double omega, double epsilon, double delta_th) {
            return min_trials(dist, omega, epsilon, delta_th).n_min;
        },
        py::arg("dist"), py::arg("omega"), py::arg("epsilon"), py::arg("delta_th"));

    m.def("tightness_ef_bounded", &tightness_ef_bounded, py::arg("u"), py::arg("omega"), py::arg("epsilon"),
          py::arg("n"));
    m.def(
        "moment_ef",
        [](double theta_e, double sigma2_e, double omega, double epsilon, double n) {
            return moment_ef(MomentSpec{theta_e, sigma2_e, std::nullopt, std::nullopt}, omega, epsilon, n);
        },
        py::arg("theta_e"), py::arg("sigma2_e"), py::arg("omega"), py::arg("epsilon"), py::arg("n"));
    m.def("gap_ef", &gap_ef, py::arg("theta_e"), py::arg("sigma2_e"), py::arg("omega"), py::arg("delta_th"));

    m.def("early_stop_n", &early_stop_n, py::arg("m"), py::arg("omega"), py::arg("gamma"));
    m.def("serfling_penalty", &serfling_penalty, py::arg("n"), py::arg("x_lb"), py::arg("x_ub"), py::arg("omega"),
          py::arg("epsilon"));
    m.def(
        "gocanin_min_trials",
        [](double i_hat, double omega, double epsilon, double delta_th) -> std::optional<std::uint64_t> {
            const ChshParams c = ChshParams::make(i_hat);
            const auto r = gocanin_min_trials(c.mean, c.range(), omega, epsilon, delta_th);
            if (r.divergent) return std::nullopt;
            return r.n;
        },
        py::arg("i_hat"), py::arg("omega"), py::arg("epsilon"), py::arg("delta_th"));
    m.def("chsh_x_range", &chsh_x_range);
}
