#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hase/config_io.hpp"
#include "hase/errors.hpp"
#include "hase/fields.hpp"
#include "hase/hase_engine.hpp"
#include "hase/manifest.hpp"
#include "hase/run_config.hpp"
#include "hase/scts.hpp"
#include "hase/spectra_analysis.hpp"

namespace py = pybind11;

namespace {

hase::RunConfig parse_config(const std::string& text) {
    return hase::run_config_from_json(hase::parse_json_text(text, "<string>"));
}

py::dict map_to_dict(const hase::PolarMomentumMap& m) {
    const auto nr = static_cast<py::ssize_t>(m.n_radial());
    const auto na = static_cast<py::ssize_t>(m.n_angular());
    py::array_t<double> p_r(nr), phi(na), inten({nr, na});
    py::array_t<bool> valid({nr, na});
    for (py::ssize_t i = 0; i < nr; ++i) p_r.mutable_at(i) = m.grid.pr(static_cast<std::size_t>(i));
    for (py::ssize_t j = 0; j < na; ++j) phi.mutable_at(j) = m.grid.phi_deg(static_cast<std::size_t>(j));
    for (py::ssize_t i = 0; i < nr; ++i)
        for (py::ssize_t j = 0; j < na; ++j) {
            const auto k = m.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            inten.mutable_at(i, j) = m.intensity[k];
            valid.mutable_at(i, j) = m.valid[k] != 0;
        }
    py::dict d;
    d["p_r"] = p_r;
    d["phi_deg"] = phi;
    d["intensity"] = inten;
    d["valid"] = valid;
    d["metadata"] = m.metadata;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "HASE maps, alpha extraction and SCTS grids";

    static py::exception<hase::Error> hase_error(m, "HaseError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const hase::Error& e) {
            py::object kind = py::str(std::string(hase::to_string(e.kind())));
            py::object type = py::reinterpret_borrow<py::object>(hase_error.ptr());
            py::object exc = type(py::str(e.what()));
            exc.attr("kind") = kind;
            PyErr_SetObject(hase_error.ptr(), exc.ptr());
        }
    });

    m.def("config_schema", &hase::config_schema, "JSON Schema of the run configuration");
    m.def(
        "validate_config", [](const std::string& text) { parse_config(text); },
        "Strict parse of a config JSON string; raises HaseError(kind='ConfigError')", py::arg("text"));

    m.def(
        "field_at",
        [](const std::string& config_text, double t) {
            const auto s = hase::eval_field(parse_config(config_text).field, t);
            return py::make_tuple(py::make_tuple(s.A.x, s.A.y, s.A.z), py::make_tuple(s.E.x, s.E.y, s.E.z));
        },
        "Vector potential and electric field at time t", py::arg("config_text"), py::arg("t"));

    m.def(
        "evaluate_map",
        [](const std::string& config_text, unsigned threads) {
            const auto c = parse_config(config_text);
            hase::MapOptions o;
            o.preset = c.preset;
            o.threads = threads;
            o.max_invalid_fraction = c.max_invalid_fraction;
            hase::PolarMomentumMap map;
            {
                py::gil_scoped_release release;
                map = hase::evaluate_map(c.field, c.ip, c.initial_state, c.grid, o);
            }
            return map_to_dict(map);
        },
        "HASE map for a config JSON string", py::arg("config_text") = "{}", py::arg("threads") = 0);

    m.def(
        "alpha_from_angular",
        [](const std::vector<double>& x, const std::string& cls) {
            const auto r = hase::alpha_from_angular(x, cls == "ATI" ? hase::PeakClass::ati : hase::PeakClass::sideband);
            return py::make_tuple(r.alpha_deg, r.raw_angle_deg);
        },
        "Offset angle (deg) and raw angle from an angular distribution", py::arg("x"), py::arg("cls") = "SB");

    m.def("wigner_delay_linear_pi", &hase::wigner_delay_linear_pi, py::arg("energy"));
    m.def(
        "wigner_delay",
        [](double phi_prime, double p_f) { return hase::wigner_delay_from_gradient(phi_prime, p_f, 0.0).delay_au; },
        py::arg("phi_prime"), py::arg("p_f"));

    m.def("git_blob_sha1", &hase::git_blob_sha1, py::arg("path"));

    m.def(
        "read_grid_summary",
        [](const std::string& path) {
            const auto g = hase::read_grid(path);
            py::dict d;
            d["kappa"] = g.kappa;
            d["seed"] = g.seed;
            d["n_traj"] = g.n_traj;
            d["shape"] = py::make_tuple(g.geometry.nx, g.geometry.ny, g.geometry.nz);
            d["bin"] = g.geometry.bin;
            std::uint64_t populated = 0;
            for (auto n : *g.count) populated += n > 0;
            d["populated_bins"] = populated;
            d["metadata"] = g.metadata;
            return d;
        },
        py::arg("path"));
}
