#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cinttypes>
#include <cstdio>

#include "mmd/pipeline.hpp"

namespace py = pybind11;

namespace {

// keyword arguments become `key = value` settings on top of the defaults
mmd::RunConfig config_from(const py::kwargs& kw) {
    mmd::RunConfig cfg;
    for (const auto& [k, v] : kw) mmd::apply_setting(cfg, py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
    return cfg;
}

py::dict sandwich_dict(const mmd::MdimEstimate& est) {
    py::list records;
    for (const auto& r : est.records) {
        py::dict d;
        d["eps"] = r.eps;
        d["n"] = r.n_used;
        d["h_lower"] = r.h_lower;
        d["h_upper"] = r.h_upper;
        d["method_lower"] = r.method_lower;
        d["method_upper"] = r.method_upper;
        records.append(d);
    }
    py::dict out;
    out["slope_lower"] = est.slope_lower;
    out["slope_upper"] = est.slope_upper;
    out["records"] = records;
    out["predicted"] = est.predicted ? py::cast(est.predicted->value) : py::none();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Metric mean dimension estimates for interval maps and transition sets.";
    py::register_exception<mmd::Error>(m, "Error", PyExc_ValueError);

    m.def("covering_number", [](std::vector<double> pts, double eps) {
        return mmd::covering_number(mmd::PointSet::from_unsorted(std::move(pts)), eps);
    }, py::arg("points"), py::arg("eps"), "Minimal number of eps-intervals covering the points.");

    m.def("spectral_radius", [](const std::vector<std::vector<double>>& rows, double tol) {
        const auto a = mmd::WeightedMatrix::from_dense(rows);
        const auto r = mmd::power_iteration(a, {.tol = tol});
        py::dict d;
        d["estimate"] = r.estimate;
        d["certified_upper"] = r.certified_upper;
        d["gershgorin"] = r.gershgorin;
        d["iterations"] = r.iterations;
        d["fallback"] = r.fallback;
        return d;
    }, py::arg("rows"), py::arg("tol") = 1e-8, "Perron root of a dense nonnegative matrix.");

    m.def("ladder", [](const py::kwargs& kw) { return mmd::ladder(config_from(kw)); },
          "Scales eps_start, eps_start / eps_ratio, ... down to eps_stop.");

    m.def("box_dimension", [](const py::kwargs& kw) {
        const auto cfg = config_from(kw);
        const auto fit = mmd::box_dimension_fit(mmd::build_set(cfg), mmd::ladder(cfg));
        py::list table;
        for (const auto& s : fit.table) table.append(py::make_tuple(s.eps, s.count));
        py::dict d;
        d["slope"] = fit.slope;
        d["residual"] = fit.residual;
        d["table"] = table;
        return d;
    }, "Box-counting fit; keywords are configuration keys (set, points, eps_start, ...).");

    m.def("sandwich", [](const py::kwargs& kw) {
        const auto cfg = config_from(kw);
        mmd::SandwichOptions opts;
        opts.depths = cfg.depths;
        opts.budget = cfg.budget;
        return sandwich_dict(mmd::mdim_sandwich(mmd::build_transition(cfg), mmd::ladder(cfg), opts));
    }, "Lower and upper slopes of eps-entropy; keywords are configuration keys (map, k_max, ...).");

    m.def("run", [](const std::string& text) {
        const auto out = mmd::run(mmd::parse_config(text));
        return py::make_tuple(out.exit_code, out.report);
    }, py::arg("config_text"), "Runs a `key = value` configuration; returns (exit code, report).");

    m.def("config_hash", [](const std::string& text) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016" PRIx64, mmd::config_hash(mmd::parse_config(text)));
        return std::string(buf);
    }, py::arg("config_text"));
}
