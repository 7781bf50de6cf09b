#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chiptrap/acceptance.hpp"
#include "chiptrap/errors.hpp"
#include "chiptrap/io.hpp"

namespace py = pybind11;
using namespace chiptrap;

namespace {

py::array_t<double> array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size(), m = n ? rows.front().size() : 0;
    py::array_t<double> out({n, m});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) r(i, j) = rows[i][j];
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Splitting microtrap: potentials, spectra, adiabaticity and ramp optimisation";

    auto base = py::register_exception<Error>(m, "Error");
    auto input = py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", input.ptr());
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<AccuracyError>(m, "AccuracyError", numerical.ptr());
    py::register_exception<GapClosedError>(m, "GapClosedError", numerical.ptr());

    py::class_<TrapConfig>(m, "TrapConfig")
        .def(py::init<>())
        .def_readwrite("I0_mA", &TrapConfig::i0_mA)
        .def_readwrite("B0y_G", &TrapConfig::b0y_G)
        .def_readwrite("B0x_G", &TrapConfig::b0x_G)
        .def_readwrite("Iext_base_mA", &TrapConfig::iext_base_mA)
        .def_readwrite("Iext_slope_mA", &TrapConfig::iext_slope_mA)
        .def_readwrite("Ic_base_mA", &TrapConfig::ic_base_mA)
        .def_readwrite("Ic_slope_mA", &TrapConfig::ic_slope_mA)
        .def_readwrite("d_ext_um", &TrapConfig::d_ext_um)
        .def_readwrite("crossing_height_um", &TrapConfig::crossing_height_um)
        .def_readwrite("ic_height_offset_um", &TrapConfig::ic_height_offset_um)
        .def_readwrite("potential_scale_Hz_per_G", &TrapConfig::scale_Hz_per_G)
        .def_readwrite("atom_mass_kg", &TrapConfig::mass_kg)
        .def("validate", &TrapConfig::validate);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("half_width_um", &GridSpec::half_width_um)
        .def_readwrite("points", &GridSpec::points)
        .def_readwrite("auto_widen", &GridSpec::auto_widen);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("trap", &RunConfig::trap)
        .def_readwrite("calibrate", &RunConfig::calibrate)
        .def_readwrite("grid", &RunConfig::grid)
        .def_readwrite("dynamics_grid", &RunConfig::dynamics_grid)
        .def_readwrite("s_points", &RunConfig::s_points)
        .def_readwrite("n_states", &RunConfig::n_states)
        .def_readwrite("pairs", &RunConfig::pairs)
        .def_readwrite("shape", &RunConfig::shape)
        .def_readwrite("T_list_ms", &RunConfig::T_list_ms)
        .def_readwrite("threads", &RunConfig::threads);
    m.def("load_config", &load_run_config, py::arg("path"));
    m.def("parse_config", &parse_run_config, py::arg("text"));

    m.def(
        "field_at",
        [](const TrapConfig& c, double s, double x, double y, double z) { return field_at(c, s, {x, y, z}); },
        py::arg("config"), py::arg("s"), py::arg("x_um"), py::arg("y_um"), py::arg("z_um"));
    m.def("symmetric_grid", &symmetric_grid, py::arg("half_width_um"), py::arg("points"));

    py::class_<PotentialCurve>(m, "PotentialCurve")
        .def_readonly("s", &PotentialCurve::s)
        .def_property_readonly("x_um", [](const PotentialCurve& c) { return array(c.x_um); })
        .def_property_readonly("U", [](const PotentialCurve& c) { return array(c.U); })
        .def_property_readonly("bmin_G", [](const PotentialCurve& c) { return array(c.bmin_G); })
        .def_readonly("min_location_um", &PotentialCurve::min_location_um)
        .def_readonly("well_separation_um", &PotentialCurve::well_separation_um)
        .def_readonly("warnings", &PotentialCurve::warnings);
    m.def("potential_curve", &potential_curve, py::arg("config"), py::arg("s"), py::arg("x_um"));

    py::class_<TrapMetrics>(m, "TrapMetrics")
        .def_readonly("omega_s0", &TrapMetrics::omega_s0)
        .def_readonly("omega_s1", &TrapMetrics::omega_s1)
        .def_readonly("trap_height_um", &TrapMetrics::trap_height_um)
        .def_readonly("separation_um", &TrapMetrics::separation_um);
    m.def("measure_trap", &measure_trap, py::arg("config"), py::arg("grid") = GridSpec{});

    py::class_<EigenBundle>(m, "EigenBundle")
        .def_property_readonly("s", [](const EigenBundle& b) { return array(b.s_grid); })
        .def_property_readonly("x_um", [](const EigenBundle& b) { return array(b.x_um()); })
        .def_property_readonly("energies",
                               [](const EigenBundle& b) {
                                   std::vector<std::vector<double>> e;
                                   for (const auto& set : b.sets) e.push_back(set.energies);
                                   return matrix(e);
                               })
        .def("states", [](const EigenBundle& b, std::size_t j) { return matrix(b.sets.at(j).states); }, py::arg("index"))
        .def_readonly("notes", &EigenBundle::notes)
        .def("save", [](const EigenBundle& b, const std::filesystem::path& dir) { save_bundle(b, dir); });
    m.def("load_bundle", &load_bundle, py::arg("dir"));
    m.def(
        "sweep_spectrum",
        [](const TrapConfig& c, int s_points, int n_states, const GridSpec& grid, unsigned threads) {
            SweepOptions o;
            o.n_states = n_states;
            o.grid = grid;
            o.threads = threads;
            return sweep_spectrum(c, uniform_s_grid(s_points), o);
        },
        py::arg("config"), py::arg("s_points") = 101, py::arg("n_states") = 6, py::arg("grid") = GridSpec{},
        py::arg("threads") = 0);

    py::class_<CouplingTable>(m, "CouplingTable")
        .def(py::init<int, int, std::vector<double>, std::vector<double>, std::vector<double>>(), py::arg("i"),
             py::arg("f"), py::arg("s"), py::arg("a"), py::arg("domega"))
        .def_property_readonly("pair", [](const CouplingTable& t) { return std::pair{t.initial(), t.final_state()}; })
        .def_property_readonly("s", [](const CouplingTable& t) { return array(t.s()); })
        .def_property_readonly("a", [](const CouplingTable& t) { return array(t.a()); })
        .def_property_readonly("domega", [](const CouplingTable& t) { return array(t.domega()); })
        .def("a_at", &CouplingTable::a_at)
        .def("domega_at", &CouplingTable::domega_at);
    m.def("coupling_table", &build_coupling_table, py::arg("bundle"), py::arg("i"), py::arg("f"));

    py::class_<Ramp>(m, "Ramp")
        .def_static("linear", &Ramp::linear, py::arg("T"))
        .def_property_readonly("duration", &Ramp::duration)
        .def_property_readonly("label", &Ramp::label)
        .def("value", &Ramp::value)
        .def("rate", &Ramp::rate)
        .def("with_duration", &Ramp::with_duration)
        .def("reversed", &Ramp::reversed)
        .def("sample", &Ramp::sample, py::arg("n"));

    py::class_<TransitionResult>(m, "TransitionResult")
        .def_readonly("T", &TransitionResult::T)
        .def_readonly("amplitude", &TransitionResult::amplitude)
        .def_readonly("probability", &TransitionResult::probability)
        .def_readonly("outside_first_order", &TransitionResult::outside_first_order)
        .def_readonly("samples", &TransitionResult::samples);
    m.def(
        "transition_amplitude", [](const CouplingTable& t, const Ramp& r) { return transition_amplitude(t, r); },
        py::arg("table"), py::arg("ramp"));
    m.def(
        "sweep_duration",
        [](const CouplingTable& t, const Ramp& r, const std::vector<double>& T, unsigned threads) {
            return sweep_duration(t, r, T, threads);
        },
        py::arg("table"), py::arg("ramp"), py::arg("T_list"), py::arg("threads") = 0);

    py::class_<OptimizedRamp>(m, "OptimizedRamp")
        .def_property_readonly("ramp", [](const OptimizedRamp& o) { return o.ramp; })
        .def_property_readonly("A", [](const OptimizedRamp& o) { return o.shape.amplitude; })
        .def_property_readonly("T0", [](const OptimizedRamp& o) { return o.map.T0; })
        .def_property_readonly("tau", [](const OptimizedRamp& o) { return array(o.shape.tau); })
        .def_property_readonly("s_tau", [](const OptimizedRamp& o) { return array(o.shape.s); })
        .def("predict_amplitude",
             [](const OptimizedRamp& o, double T) { return predict_amplitude_fourier(o.shape, T, o.map.T0); });
    m.def(
        "optimize_ramp",
        [](const CouplingTable& t, double T, const std::string& shape, double floor_fraction) {
            ShapeOptions so;
            so.floor_fraction = floor_fraction;
            return optimize_ramp(t, shape_by_name(shape), T, so);
        },
        py::arg("table"), py::arg("T"), py::arg("shape") = "blackman", py::arg("floor_fraction") = 1e-3);

    m.def("gradient_dephasing", &gradient_dephasing, py::arg("separation_um"), py::arg("gradient_G_per_cm"),
          py::arg("T_sense_s"), py::arg("scale_Hz_per_G") = 1.4e6);

    py::class_<CriterionResult>(m, "CriterionResult")
        .def_readonly("id", &CriterionResult::id)
        .def_readonly("title", &CriterionResult::title)
        .def_readonly("passed", &CriterionResult::passed)
        .def_readonly("detail", &CriterionResult::detail);
    m.def(
        "run_acceptance",
        [](const RunConfig& rc, std::vector<int> only) {
            AcceptanceOptions o;
            o.threads = rc.threads;
            o.only = std::move(only);
            py::gil_scoped_release release;
            return run_acceptance(rc, o);
        },
        py::arg("config"), py::arg("only") = std::vector<int>{});
}
