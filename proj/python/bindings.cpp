#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iadmm/errors.hpp"
#include "iadmm/outer.hpp"
#include "iadmm/problems.hpp"
#include "iadmm/prox.hpp"
#include "iadmm/verify.hpp"

namespace py = pybind11;
using namespace iadmm;

namespace {

py::dict history_dict(const SolveReport& r) {
    std::vector<long> k;
    std::vector<double> eps, feas, obj, rho, E, kkt;
    for (const auto& h : r.history) {
        k.push_back(h.k);
        eps.push_back(h.eps);
        feas.push_back(h.feas);
        obj.push_back(h.obj);
        rho.push_back(h.rho);
        E.push_back(h.E.value_or(std::nan("")));
        kkt.push_back(h.kkt.value_or(std::nan("")));
    }
    py::dict d;
    d["k"] = k;
    d["eps"] = eps;
    d["feas"] = feas;
    d["obj"] = obj;
    d["rho"] = rho;
    d["E"] = E;
    d["kkt"] = kkt;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Inexact multi-block ADMM with Gauss-Seidel inner loops";

    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def("soft_threshold", py::overload_cast<const Vector&, double>(&soft_threshold), py::arg("y"),
          py::arg("tau"));
    m.def("soft_threshold", py::overload_cast<const Vector&, const Vector&>(&soft_threshold), py::arg("y"),
          py::arg("tau"));
    m.def("group_shrink", &group_shrink, py::arg("y"), py::arg("tau"), py::arg("group_size") = 2);

    py::class_<CorpusEntry>(m, "Problem")
        .def_readonly("id", &CorpusEntry::id)
        .def_readonly("tags", &CorpusEntry::tags)
        .def_property_readonly("num_blocks", [](const CorpusEntry& e) { return e.problem.num_blocks(); })
        .def_property_readonly("dims", [](const CorpusEntry& e) { return e.problem.dims(); })
        .def_property_readonly("rows", [](const CorpusEntry& e) { return e.problem.rows(); })
        .def_property_readonly("x_star",
                               [](const CorpusEntry& e) -> std::optional<Vector> {
                                   if (!e.reference) return std::nullopt;
                                   return e.reference->x.flat();
                               })
        .def_property_readonly("lambda_star",
                               [](const CorpusEntry& e) -> std::optional<Vector> {
                                   if (!e.reference) return std::nullopt;
                                   return e.reference->lambda;
                               })
        .def("kkt_error",
             [](const CorpusEntry& e, const Vector& x, const Vector& lambda) {
                 return kkt_error(e.problem, BlockVector(e.problem.dims(), x), lambda);
             })
        .def("objective",
             [](const CorpusEntry& e, const Vector& x) {
                 return objective(e.problem, BlockVector(e.problem.dims(), x));
             })
        .def("fingerprint", [](const CorpusEntry& e) { return fingerprint(e); })
        .def("__repr__", [](const CorpusEntry& e) { return "<Problem " + e.id + ">"; });

    m.def("load", &load_corpus, py::arg("id"));

    m.def(
        "solve",
        [](const CorpusEntry& e, const std::string& mode, const std::string& rule, double tol,
           long max_outer, double alpha, double rho, double sigma, bool safeguard) {
            SolverParams p;
            p.mode = parse_mode(mode);
            p.rule = parse_rule(rule);
            p.tol = tol;
            p.max_outer = max_outer;
            p.alpha = alpha;
            p.rho = rho;
            p.sigma = sigma;
            if (safeguard) p.gamma_init = GammaInit::safeguard;
            SolveOptions o;
            o.reference = e.reference;
            SolveReport r;
            {
                py::gil_scoped_release nogil;
                r = solve(e.problem, p, o);
            }
            py::dict d;
            d["cause"] = to_string(r.cause);
            d["converged"] = r.converged();
            d["iterations"] = r.iterations();
            d["seconds"] = r.seconds;
            d["x"] = Vector(r.final_state.z.flat());
            d["lambda"] = r.final_state.lambda;
            d["safeguard_events"] = r.safeguard_events.size();
            d["history"] = history_dict(r);
            return d;
        },
        py::arg("problem"), py::arg("mode") = "convex", py::arg("rule") = "adaptive", py::arg("tol") = 1e-8,
        py::arg("max_outer") = 100000, py::arg("alpha") = 0.5, py::arg("rho") = 1.0, py::arg("sigma") = 0.99,
        py::arg("safeguard") = false);

    m.def("suite_names", &suite_names);
    m.def(
        "verify",
        [](const std::string& name) {
            SuiteReport r;
            {
                py::gil_scoped_release nogil;
                r = run_suite(name);
            }
            py::dict d;
            d["passed"] = r.passed();
            d["checks"] = r.rows.size();
            d["failures"] = r.failures();
            d["notes"] = r.notes;
            d["seconds"] = r.seconds;
            return d;
        },
        py::arg("name"));
}
