#include "fracsing/analysis.hpp"
#include "fracsing/commands.hpp"
#include "fracsing/config.hpp"
#include "fracsing/exponents.hpp"
#include "fracsing/field.hpp"
#include "fracsing/geometry.hpp"
#include "fracsing/io.hpp"
#include "fracsing/kernel.hpp"
#include "fracsing/solver.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace fracsing;

namespace {

py::array_t<double> to_array(std::span<const double> v)
{
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> node_array(const GridDomain& g)
{
    py::array_t<double> out({static_cast<py::ssize_t>(g.node_count()), static_cast<py::ssize_t>(g.dim())});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < g.node_count(); ++i)
        for (int d = 0; d < g.dim(); ++d) m(i, d) = g.node(i)[d];
    return out;
}

py::dict stage_dict(const StageRecord& r)
{
    py::dict d;
    d["n"] = r.n;
    d["converged"] = r.converged;
    d["inner_iterations"] = r.inner_iterations;
    d["fixed_point_iterations"] = r.fixed_point_iterations;
    d["sup_increment"] = r.sup_increment;
    d["min_increment"] = r.min_increment;
    d["seminorm"] = r.seminorm;
    d["seminorm_qb"] = r.seminorm_qb;
    d["interior_min"] = r.interior_min;
    d["residual"] = r.residual;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Discrete singular fractional p-Laplacian problems";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::enum_<AssumptionPolicy>(m, "AssumptionPolicy")
        .value("Strict", AssumptionPolicy::Strict)
        .value("Borderline", AssumptionPolicy::Borderline)
        .value("Off", AssumptionPolicy::Off);

    py::enum_<FixedPointMethod>(m, "FixedPointMethod")
        .value("Picard", FixedPointMethod::Picard)
        .value("Energy", FixedPointMethod::Energy);

    py::class_<Hyperplane>(m, "Hyperplane")
        .def_static("coordinate", &Hyperplane::coordinate, py::arg("axis"), py::arg("offset") = 0.0)
        .def("reflect", &Hyperplane::reflect)
        .def("__repr__", &Hyperplane::describe);

    py::class_<GridDomain, std::shared_ptr<GridDomain>>(m, "GridDomain")
        .def_property_readonly("dim", &GridDomain::dim)
        .def_property_readonly("node_count", &GridDomain::node_count)
        .def_property_readonly("interior_count", &GridDomain::interior_count)
        .def_property_readonly("cell_volume", &GridDomain::cell_volume)
        .def_property_readonly("spacing", &GridDomain::spacing)
        .def_property_readonly("interior_indices", &GridDomain::interior_indices)
        .def_property_readonly("symmetry_axes", &GridDomain::symmetry_axes)
        .def_property_readonly("nodes", &node_array)
        .def("reflect", &GridDomain::reflect)
        .def("__repr__", &GridDomain::describe);

    // DomainPtr is shared_ptr<const GridDomain>; expose the factories through the non-const holder.
    auto unconst = [](DomainPtr d) { return std::const_pointer_cast<GridDomain>(std::move(d)); };
    m.def("interval", [unconst](double a, double b, std::size_t M, double pad) { return unconst(build_interval(a, b, M, pad)); },
          py::arg("a") = -1.0, py::arg("b") = 1.0, py::arg("M") = 129, py::arg("pad") = 1.0);
    m.def("rectangle",
          [unconst](Point lo, Point hi, std::array<std::size_t, 2> M, double pad) {
              return unconst(build_rectangle(lo, hi, M, pad));
          },
          py::arg("lo"), py::arg("hi"), py::arg("M"), py::arg("pad") = 1.0);
    m.def("ball", [unconst](Point c, double r, std::size_t M, double pad) { return unconst(build_ball(c, r, M, pad)); },
          py::arg("center") = Point{0.0, 0.0}, py::arg("radius") = 1.0, py::arg("M") = 33, py::arg("pad") = 1.0);

    py::class_<Field>(m, "Field")
        .def(py::init([](std::shared_ptr<GridDomain> d) { return Field(d); }))
        .def_static("from_values",
                    [](std::shared_ptr<GridDomain> d, const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
                        return Field::from_values(d, from_array(v));
                    })
        .def_static("from_interior",
                    [](std::shared_ptr<GridDomain> d, const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
                        return Field::from_interior(d, from_array(v));
                    })
        .def_static("from_function",
                    [](std::shared_ptr<GridDomain> d, const std::function<double(const Point&)>& g) {
                        return Field::from_function(d, g);
                    })
        .def_property_readonly("values", [](const Field& f) { return to_array(f.values()); })
        .def_property_readonly("interior_values", [](const Field& f) {
            const auto v = f.interior_values();
            return to_array(v);
        })
        .def("min", &Field::min)
        .def("max", &Field::max)
        .def("integral", &Field::integral)
        .def("__len__", &Field::size);

    m.def("sup_distance", &sup_distance);

    py::class_<KernelWeights>(m, "KernelWeights")
        .def_static("assemble",
                    [](std::shared_ptr<GridDomain> d, double s, double p, AssumptionPolicy policy) {
                        return KernelWeights::assemble(d, s, p, policy);
                    },
                    py::arg("domain"), py::arg("s"), py::arg("p"), py::arg("policy") = AssumptionPolicy::Borderline)
        .def_property_readonly("s", &KernelWeights::s)
        .def_property_readonly("p", &KernelWeights::p)
        .def_property_readonly("unknowns", &KernelWeights::unknowns)
        .def("pair_weight", &KernelWeights::pair_weight)
        .def("tail_weight", &KernelWeights::tail_weight)
        .def("energy", [](const KernelWeights& w, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            return w.energy(from_array(x));
        })
        .def("gradient", [](const KernelWeights& w, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const auto v = from_array(x);
            std::vector<double> g(v.size());
            w.energy_and_gradient(v, g);
            return to_array(g);
        });

    m.def("seminorm_p", &seminorm_p);
    m.def("apply_operator", &apply_operator);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def_static("make", &ProblemSpec::make, py::arg("p"), py::arg("s"), py::arg("gamma"), py::arg("f"))
        .def_readonly("p", &ProblemSpec::p)
        .def_readonly("s", &ProblemSpec::s)
        .def_readonly("gamma", &ProblemSpec::gamma)
        .def_readonly("f", &ProblemSpec::f)
        .def("boundary_exponent", &ProblemSpec::boundary_exponent);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("inner_tol", &SolverConfig::inner_tol)
        .def_readwrite("outer_tol", &SolverConfig::outer_tol)
        .def_readwrite("max_inner_iters", &SolverConfig::max_inner_iters)
        .def_readwrite("max_outer_iters", &SolverConfig::max_outer_iters)
        .def_readwrite("n_schedule", &SolverConfig::n_schedule)
        .def_readwrite("damping", &SolverConfig::damping)
        .def_readwrite("method", &SolverConfig::method)
        .def_readwrite("lbfgs_memory", &SolverConfig::lbfgs_memory);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("solution", &SolveReport::solution)
        .def_readonly("converged", &SolveReport::converged)
        .def_readonly("residual", &SolveReport::residual)
        .def_readonly("extrapolation_error", &SolveReport::extrapolation_error)
        .def_readonly("boundary_exponent", &SolveReport::boundary_exponent)
        .def_readonly("notes", &SolveReport::notes)
        .def_property_readonly("stages", [](const SolveReport& r) {
            py::list out;
            for (const StageRecord& s : r.stages) out.append(stage_dict(s));
            return out;
        })
        .def("to_json", [](const SolveReport& r) { return report_json(r).dump(); });

    m.def("solve",
          [](const ProblemSpec& prob, const KernelWeights& weights, const SolverConfig& config) {
              py::gil_scoped_release release;
              return solve_singular(prob, weights, config);
          },
          py::arg("problem"), py::arg("weights"), py::arg("config") = SolverConfig{});

    py::class_<ExponentTable>(m, "ExponentTable")
        .def_readonly("p_star", &ExponentTable::p_star)
        .def_readonly("p_star_dual", &ExponentTable::p_star_dual)
        .def_readonly("m", &ExponentTable::m)
        .def_readonly("m_prime", &ExponentTable::m_prime)
        .def_readonly("q_b", &ExponentTable::q_b)
        .def_readonly("r", &ExponentTable::r)
        .def_property_readonly("r_finite", [](const ExponentTable& t) { return t.r_kind == SummabilityKind::Finite; })
        .def_readonly("r_note", &ExponentTable::r_note);
    m.def("exponents", &exponents, py::arg("p"), py::arg("s"), py::arg("N"), py::arg("gamma"), py::arg("q") = 1.0);

    py::class_<PowerGapReport>(m, "PowerGapReport")
        .def_readonly("samples", &PowerGapReport::samples)
        .def_readonly("violations", &PowerGapReport::violations)
        .def_readonly("min_slack", &PowerGapReport::min_slack);
    m.def("power_gap_check", &lemma_dino_check, py::arg("q"), py::arg("eps"), py::arg("samples"),
          py::arg("seed") = 0x5eed);

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("anchor", &CheckResult::anchor)
        .def_property_readonly("status", [](const CheckResult& r) { return std::string(to_string(r.status)); })
        .def_readonly("margin", &CheckResult::margin)
        .def_readonly("message", &CheckResult::message)
        .def_readonly("metrics", &CheckResult::metrics);

    py::class_<RunConfig>(m, "RunConfig")
        .def("to_json", [](const RunConfig& c) { return to_json(c).dump(); })
        .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; });
    m.def("parse_config", &parse_config, py::arg("text"), py::arg("base_dir") = std::filesystem::path{});
    m.def("load_config", &load_config);
    m.def("verify", [](const RunConfig& c) {
        py::gil_scoped_release release;
        return run_checks(c);
    });
    m.def("known_checks", &known_checks);
}
