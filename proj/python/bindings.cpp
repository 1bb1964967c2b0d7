#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "weilfield/dynamics.hpp"
#include "weilfield/errors.hpp"
#include "weilfield/harness.hpp"
#include "weilfield/lattice.hpp"
#include "weilfield/pauli_jordan.hpp"
#include "weilfield/poisson.hpp"
#include "weilfield/weil.hpp"
#include "weilfield/zuckerman.hpp"

namespace py = pybind11;
namespace wf = weilfield;
namespace wh = weilfield::harness;

// Algebras are shared as pointers to const; expose them through a mutable
// holder type on the Python side.
namespace pybind11::detail {
template <>
struct type_caster<wf::AlgebraPtr> {
    using Mutable = std::shared_ptr<wf::WeilAlgebra>;
    PYBIND11_TYPE_CASTER(wf::AlgebraPtr, const_name("WeilAlgebra"));
    bool load(handle src, bool convert) {
        make_caster<Mutable> c;
        if (!c.load(src, convert)) return false;
        value = cast_op<Mutable>(c);
        return true;
    }
    static handle cast(const wf::AlgebraPtr& p, return_value_policy policy, handle parent) {
        return make_caster<Mutable>::cast(std::const_pointer_cast<wf::WeilAlgebra>(p), policy, parent);
    }
};
}  // namespace pybind11::detail

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

// (n,) real data or (n, dim) Weil data -> WeilArray
wf::WeilArray to_weil_array(const Array& a, const wf::AlgebraPtr& alg) {
    const std::size_t dim = alg->dim();
    if (a.ndim() == 1 && dim == 1) return wf::WeilArray::from_real(alg, {a.data(), static_cast<std::size_t>(a.size())});
    if (a.ndim() == 1) {
        wf::WeilArray out(alg, a.shape(0));
        for (py::ssize_t i = 0; i < a.shape(0); ++i) out.at(i)[0] = a.at(i);
        return out;
    }
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != dim)
        throw wf::ValidationError("expected an array of shape (n,) or (n, algebra.dim)");
    wf::WeilArray out(alg, a.shape(0));
    std::copy(a.data(), a.data() + a.size(), out.raw().begin());
    return out;
}

wf::CauchyData to_data(const Array& phi, const Array& pi, const wf::AlgebraPtr& alg) {
    if (phi.shape(0) != pi.shape(0)) throw wf::ValidationError("phi and pi lengths differ");
    return {to_weil_array(phi, alg), to_weil_array(pi, alg), 0};
}

py::array_t<double> grid_to_numpy(const wf::WeilGrid& g) {
    const std::size_t dim = g.dim();
    std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(g.rows()), static_cast<py::ssize_t>(g.cols())};
    if (dim > 1) shape.push_back(static_cast<py::ssize_t>(dim));
    py::array_t<double> out(shape);
    std::copy(g.raw().begin(), g.raw().end(), out.mutable_data());
    return out;
}

py::array_t<double> array_to_numpy(const wf::WeilArray& a) {
    std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(a.size())};
    if (a.dim() > 1) shape.push_back(static_cast<py::ssize_t>(a.dim()));
    py::array_t<double> out(shape);
    std::copy(a.raw().begin(), a.raw().end(), out.mutable_data());
    return out;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& o) {
    if (py::isinstance<py::str>(o)) return nlohmann::json::parse(o.cast<std::string>());
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

wf::Observable slice_observable(const wf::LatticeSpacetime& lat, const std::string& kind, std::vector<double> w) {
    if (kind == "phi") return wf::Observable::slice_phi(lat, std::move(w));
    if (kind == "pi") return wf::Observable::slice_pi(lat, std::move(w));
    throw wf::ValidationError("slice observable kind must be 'phi' or 'pi'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weil-algebra lattice field theory: solver, presymplectic form and Poisson brackets";

    py::register_exception<wf::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<wf::ConeEscape>(m, "ConeEscape", PyExc_RuntimeError);

    py::class_<wf::WeilAlgebra, std::shared_ptr<wf::WeilAlgebra>>(m, "WeilAlgebra")
        .def(py::init([](std::vector<int> orders) {
                 return std::const_pointer_cast<wf::WeilAlgebra>(wf::WeilAlgebra::create(std::move(orders)));
             }),
             py::arg("orders"))
        .def_property_readonly("dim", &wf::WeilAlgebra::dim)
        .def_property_readonly("orders", &wf::WeilAlgebra::orders)
        .def_property_readonly("num_generators", &wf::WeilAlgebra::num_generators)
        .def("__repr__", [](const wf::WeilAlgebra& a) {
            std::string s = "WeilAlgebra([";
            for (std::size_t i = 0; i < a.orders().size(); ++i) s += (i ? ", " : "") + std::to_string(a.orders()[i]);
            return s + "])";
        });
    m.def("make_real", &wf::make_real);
    m.def("make_dual", &wf::make_dual);
    m.def("make_jet", &wf::make_jet, py::arg("order"));
    m.def("tensor", &wf::tensor);
    m.def("extend_dual", &wf::extend_dual);

    py::class_<wf::WeilValue>(m, "WeilValue")
        .def(py::init<wf::AlgebraPtr, double>(), py::arg("algebra"), py::arg("scalar") = 0.0)
        .def(py::init<wf::AlgebraPtr, std::vector<double>>(), py::arg("algebra"), py::arg("coeffs"))
        .def_static("generator", &wf::WeilValue::generator, py::arg("algebra"), py::arg("index"),
                    py::arg("coeff") = 1.0)
        .def_property_readonly("algebra", &wf::WeilValue::algebra)
        .def_property_readonly("scalar", &wf::WeilValue::scalar)
        .def_property_readonly("coeffs",
                               [](const wf::WeilValue& w) {
                                   auto c = w.coeffs();
                                   return std::vector<double>(c.begin(), c.end());
                               })
        .def("coefficient", py::overload_cast<const wf::MultiIndex&>(&wf::WeilValue::coefficient, py::const_))
        .def(py::self + py::self)
        .def(py::self - py::self)
        .def(py::self * py::self)
        .def(py::self * double())
        .def(double() * py::self)
        .def(-py::self)
        .def(py::self == py::self)
        .def("sin", [](const wf::WeilValue& w) { return wf::apply_smooth(wf::smooth::sin(), w); })
        .def("cos", [](const wf::WeilValue& w) { return wf::apply_smooth(wf::smooth::cos(), w); })
        .def("exp", [](const wf::WeilValue& w) { return wf::apply_smooth(wf::smooth::exp(), w); })
        .def("__pow__", [](const wf::WeilValue& w, int p) { return wf::apply_smooth(wf::smooth::power(p), w); });

    py::enum_<wf::Topology>(m, "Topology").value("circle", wf::Topology::circle).value("line", wf::Topology::line);

    py::class_<wf::LatticeSpacetime>(m, "Lattice")
        .def_static("circle", &wf::LatticeSpacetime::circle, py::arg("n_space"), py::arg("length"),
                    py::arg("dt_ratio"), py::arg("n_time"))
        .def_static("line", &wf::LatticeSpacetime::line, py::arg("n_space"), py::arg("length"), py::arg("dt_ratio"),
                    py::arg("n_time"), py::arg("guard") = 2)
        .def_property_readonly("topology", &wf::LatticeSpacetime::topology)
        .def_property_readonly("n_space", &wf::LatticeSpacetime::n_space)
        .def_property_readonly("n_time", &wf::LatticeSpacetime::n_time)
        .def_property_readonly("dx", &wf::LatticeSpacetime::dx)
        .def_property_readonly("dt", &wf::LatticeSpacetime::dt)
        .def_property_readonly("length", &wf::LatticeSpacetime::length)
        .def_property_readonly("guard", &wf::LatticeSpacetime::guard)
        .def("positions", [](const wf::LatticeSpacetime& l) {
            std::vector<double> x(l.n_space());
            for (int i = 0; i < l.n_space(); ++i) x[i] = l.position(i);
            return py::array_t<double>(x.size(), x.data());
        })
        .def("times", [](const wf::LatticeSpacetime& l) {
            std::vector<double> t(l.n_rows());
            for (int n = 0; n < l.n_rows(); ++n) t[n] = l.time(n);
            return py::array_t<double>(t.size(), t.data());
        });

    py::class_<wf::Interaction>(m, "Interaction")
        .def_static("free", &wf::Interaction::free)
        .def_static("mass", &wf::Interaction::mass, py::arg("m"))
        .def_static("phi4", &wf::Interaction::phi4, py::arg("coupling"))
        .def_static("sine_gordon", &wf::Interaction::sine_gordon)
        .def_static("polynomial", &wf::Interaction::custom, py::arg("coeffs"))
        .def_readonly("name", &wf::Interaction::name);

    m.def(
        "solve",
        [](const Array& phi, const Array& pi, const wf::Interaction& rho, const wf::LatticeSpacetime& lat,
           py::object algebra) {
            wf::AlgebraPtr alg = algebra.is_none() ? wf::make_real() : algebra.cast<wf::AlgebraPtr>();
            return grid_to_numpy(wf::solve_cauchy(to_data(phi, pi, alg), rho, lat).values);
        },
        py::arg("phi"), py::arg("pi"), py::arg("interaction"), py::arg("lattice"), py::arg("algebra") = py::none(),
        "Leapfrog solution, shape (n_time+1, n_space) or (n_time+1, n_space, dim).");

    m.def(
        "eom_residual",
        [](const Array& history, const wf::Interaction& rho, const wf::LatticeSpacetime& lat) {
            if (history.ndim() != 2) throw wf::ValidationError("expected a real history of shape (rows, cols)");
            wf::FieldHistory h{lat, wf::WeilGrid(wf::make_real(), history.shape(0), history.shape(1))};
            if (static_cast<int>(history.shape(0)) != lat.n_rows() || static_cast<int>(history.shape(1)) != lat.n_space())
                throw wf::ValidationError("history shape does not match the lattice");
            std::copy(history.data(), history.data() + history.size(), h.values.raw().begin());
            return grid_to_numpy(wf::eom_residual(h, rho).values);
        },
        py::arg("history"), py::arg("interaction"), py::arg("lattice"));

    m.def(
        "restrict_data",
        [](const Array& history, const wf::LatticeSpacetime& lat, int slice) {
            wf::FieldHistory h{lat, wf::WeilGrid(wf::make_real(), lat.n_rows(), lat.n_space())};
            if (history.size() != static_cast<py::ssize_t>(h.values.raw().size()))
                throw wf::ValidationError("history shape does not match the lattice");
            std::copy(history.data(), history.data() + history.size(), h.values.raw().begin());
            auto d = wf::restrict_data(h, slice);
            return py::make_tuple(array_to_numpy(d.phi), array_to_numpy(d.pi));
        },
        py::arg("history"), py::arg("lattice"), py::arg("slice") = 0);

    m.def(
        "tangent_lift",
        [](const Array& phi, const Array& pi, const Array& v_phi, const Array& v_pi, const wf::Interaction& rho,
           const wf::LatticeSpacetime& lat) {
            auto r = wf::make_real();
            auto h = wf::tangent_lift(to_data(phi, pi, r), to_data(v_phi, v_pi, r), rho, lat);
            return py::make_tuple(grid_to_numpy(h.dual_part(r, 0).values), grid_to_numpy(h.dual_part(r, 1).values));
        },
        py::arg("phi"), py::arg("pi"), py::arg("v_phi"), py::arg("v_pi"), py::arg("interaction"), py::arg("lattice"),
        "(base, fiber) histories of the linearised solution.");

    m.def(
        "presymplectic_form",
        [](const Array& phi, const Array& pi, const Array& a_phi, const Array& a_pi, const Array& b_phi,
           const Array& b_pi, const wf::Interaction& rho, const wf::LatticeSpacetime& lat, py::object slices) {
            auto r = wf::make_real();
            auto [va, vb] = wf::make_tangent_pair(to_data(phi, pi, r), to_data(a_phi, a_pi, r),
                                                  to_data(b_phi, b_pi, r), rho, lat);
            std::vector<int> rows;
            if (slices.is_none()) {
                for (int n = 0; n < lat.n_rows(); ++n) rows.push_back(n);
            } else {
                rows = slices.cast<std::vector<int>>();
            }
            std::vector<double> out;
            for (int n : rows) out.push_back(wf::presymplectic_form(va, vb, n).scalar());
            return py::array_t<double>(out.size(), out.data());
        },
        py::arg("phi"), py::arg("pi"), py::arg("a_phi"), py::arg("a_pi"), py::arg("b_phi"), py::arg("b_pi"),
        py::arg("interaction"), py::arg("lattice"), py::arg("slices") = py::none(),
        "Presymplectic form of two tangent vectors on the requested time rows (all rows by default).");

    m.def(
        "slice_bracket",
        [](const wf::LatticeSpacetime& lat, const std::string& kind_a, std::vector<double> f, const std::string& kind_b,
           std::vector<double> g, const Array& phi, const Array& pi) {
            auto r = wf::make_real();
            wf::PoissonContext ctx{lat, wf::OmegaOperator::canonical(lat), {to_data(phi, pi, r)}};
            auto p = wf::make_pair(slice_observable(lat, kind_a, std::move(f)), ctx);
            auto q = wf::make_pair(slice_observable(lat, kind_b, std::move(g)), ctx);
            auto b = wf::bracket(p, q, ctx);
            return py::make_tuple(b.f(ctx.samples.front()).scalar(), b.residual);
        },
        py::arg("lattice"), py::arg("kind_a"), py::arg("f"), py::arg("kind_b"), py::arg("g"), py::arg("phi"),
        py::arg("pi"), "Bracket {int f X_a, int g X_b} at the given data, and its residual.");

    m.def("pauli_jordan_function", &wf::pauli_jordan_function, py::arg("tau"), py::arg("x"), py::arg("length"),
          py::arg("n_modes"), py::arg("mass"));
    m.def(
        "pauli_jordan_bracket",
        [](const wf::LatticeSpacetime& lat, double mass, const Array& f, const Array& g) {
            return wf::pauli_jordan_bracket(lat, mass, {f.data(), static_cast<std::size_t>(f.size())},
                                            {g.data(), static_cast<std::size_t>(g.size())});
        },
        py::arg("lattice"), py::arg("mass"), py::arg("f"), py::arg("g"));

    m.def(
        "default_config", [](const std::string& kind) { return json_to_py(wh::default_config(wh::experiment_from_string(kind))); },
        py::arg("experiment"));
    m.def(
        "run_experiment",
        [](py::object config, py::object out) {
            wh::ExperimentConfig cfg = wh::parse_config(py_to_json(config));
            wh::Report rep;
            {
                py::gil_scoped_release release;
                rep = wh::run(cfg);
            }
            if (!out.is_none()) wh::write_report(rep, out.cast<std::string>());
            py::dict d = json_to_py(rep.summary());
            py::dict tables;
            for (const auto& t : rep.tables) tables[py::str(t.name)] = t.csv();
            d["csv"] = tables;
            return d;
        },
        py::arg("config"), py::arg("out") = py::none(),
        "Run an experiment from a config dict or JSON string; returns the report summary with CSV tables.");
    m.attr("__version__") = wh::version();
}
