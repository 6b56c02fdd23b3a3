#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tse/config.hpp"
#include "tse/errors.hpp"
#include "tse/experiment.hpp"
#include "tse/metrics.hpp"
#include "tse/physics.hpp"

namespace py = pybind11;
using namespace tse;

namespace {

Mode mode_of(const std::string& name) {
    if (name == "pidl") return Mode::pidl;
    if (name == "dl") return Mode::dl;
    throw ConfigError("mode must be 'pidl' or 'dl', not '" + name + "'");
}

py::dict report_dict(const RunReport& r) {
    py::dict d;
    d["label"] = r.label;
    d["sample_size"] = r.sample_size;
    d["percent_data"] = r.percent_data;
    d["j_dl"] = r.j_dl;
    d["j_phy"] = r.j_phy;
    d["j_total"] = r.j_total;
    d["relative_error"] = r.relative_error;
    d["accuracy"] = r.accuracy;
    d["wall_seconds"] = r.wall_seconds;
    d["epochs_run"] = r.epochs_run;
    d["terminated_by"] = r.terminated_by;
    d["seed"] = r.seed;
    return d;
}

Grid grid_for(const Eigen::MatrixXd& values) {
    Grid g;
    g.n_x = static_cast<int>(values.rows());
    g.n_t = static_cast<int>(values.cols());
    return g;
}

}  // namespace

PYBIND11_MODULE(_tse, m) {
    m.doc() = "Traffic state estimation: LWR simulator, PIDL/DL training, metrics";

    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
    (void)config_error;

    py::class_<ExperimentConfig>(m, "Config")
        .def(py::init<>())
        .def_static("from_text", [](const std::string& text) { return parse_config(text); })
        .def_static("from_file", [](const std::filesystem::path& p) { return load_config(p); })
        .def("set", [](ExperimentConfig& c, const std::string& key, const std::string& value) {
            set_value(c, key, value);
        })
        .def("to_text", [](const ExperimentConfig& c) { return to_text(c); })
        .def("hash", [](const ExperimentConfig& c) { return config_hash(c); })
        .def("validate", &ExperimentConfig::validate)
        .def_property("out_dir", [](const ExperimentConfig& c) { return c.out_dir; },
                      [](ExperimentConfig& c, const std::filesystem::path& p) { c.out_dir = p; })
        .def_property_readonly("n_x", [](const ExperimentConfig& c) { return c.grid.n_x; })
        .def_property_readonly("n_t", [](const ExperimentConfig& c) { return c.grid.n_t; })
        .def("__repr__", [](const ExperimentConfig& c) { return "<tse.Config " + config_hash(c).substr(0, 12) + ">"; });

    m.def("config_keys", &config_keys);

    m.def(
        "simulate",
        [](const ExperimentConfig& c) {
            c.validate();
            const Simulation sim = simulate(c.ic, c.grid, c.fd, c.boundary);
            py::dict d;
            d["density"] = sim.density.values;
            d["velocity"] = sim.velocity.values;
            return d;
        },
        py::arg("config") = ExperimentConfig{},
        "Ground-truth density and speed, n_x rows by n_t columns.");

    m.def("relative_error", [](const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
        if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
            throw ContractError("estimate and truth shapes differ");
        }
        return relative_error({grid_for(estimate), estimate}, {grid_for(truth), truth});
    });

    m.def("lwr_residual", [](double v, double v_x, double v_t, double v_free, double rho_max) {
        return lwr_residual({v, v_x, v_t}, FdParams{v_free, rho_max});
    }, py::arg("v"), py::arg("v_x"), py::arg("v_t"), py::arg("v_free") = 25.0, py::arg("rho_max") = 0.05);

    m.def("generate", [](const ExperimentConfig& c) { return cmd_generate(c).dir; });

    m.def("train", [](const ExperimentConfig& c, const std::string& mode) {
        py::gil_scoped_release release;
        RunOutcome r = cmd_train(c, mode_of(mode));
        py::gil_scoped_acquire acquire;
        py::dict d = report_dict(r.report);
        d["dir"] = r.dir;
        return d;
    }, py::arg("config"), py::arg("mode") = "pidl");

    m.def("sweep", [](const ExperimentConfig& c) {
        SweepOutcome s;
        {
            py::gil_scoped_release release;
            s = cmd_sweep(c);
        }
        py::list runs;
        for (const auto& run : s.runs) {
            py::dict d = run.ok ? report_dict(run.outcome.report) : py::dict();
            d["sample_size"] = run.sample_size;
            d["seed"] = run.seed;
            d["mode"] = to_string(run.mode);
            d["ok"] = run.ok;
            d["error"] = run.error;
            runs.append(d);
        }
        py::dict out;
        out["runs"] = runs;
        out["table"] = s.table.text;
        out["failures"] = s.failures;
        return out;
    });

    m.def("evaluate", [](const ExperimentConfig& c) { return report_dict(cmd_evaluate(c)); });
}
