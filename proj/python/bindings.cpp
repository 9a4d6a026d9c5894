// _core: thin pybind11 layer. JSON crosses the boundary as text; the Python
// package converts to and from dicts.

#include "missinfo/builtin_models.hpp"
#include "missinfo/report.hpp"
#include "missinfo/runner.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace missinfo;

namespace {

json outcome_json(const RunResult& r) {
    json entries = json::array();
    for (auto& e : r.entries)
        entries.push_back({{"name", e.name},
                           {"exit_code", e.exit_code},
                           {"report", e.report},
                           {"report_path", e.report_path},
                           {"files", e.files}});
    return {{"exit_code", r.exit_code}, {"entries", entries}, {"errors", r.errors}};
}

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Relative information measures for incomplete-data likelihood inference";
    m.attr("__version__") = kToolVersion;

    auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<UnsupportedError>(m, "UnsupportedError", validation.ptr());
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<HeavyTailError>(m, "HeavyTailError", numerical.ptr());

    m.def(
        "run_manifest",
        [](const std::string& manifest, const std::string& base_dir, const std::string& out_dir,
           std::optional<std::uint64_t> seed, int workers) {
            const json doc = parse(manifest, "manifest");
            RunOptions o;
            o.out_dir = out_dir;
            o.seed = seed;
            o.workers = workers;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_manifest(doc, base_dir, o);
            }
            return outcome_json(r).dump();
        },
        py::arg("manifest"), py::arg("base_dir"), py::arg("out_dir"), py::arg("seed") = py::none(),
        py::arg("workers") = 1);

    m.def(
        "check_manifest", [](const std::string& manifest) { return check_manifest(parse(manifest, "manifest")); },
        py::arg("manifest"));

    m.def(
        "validate_dataset",
        [](const std::string& path, const std::string& model, const std::string& model_options) {
            auto v = validate_dataset_file(path, model, parse(model_options, "model_options"));
            return json{{"path", v.path}, {"model", v.model}, {"problems", v.problems}, {"ok", v.ok()}}.dump();
        },
        py::arg("path"), py::arg("model") = "", py::arg("model_options") = "{}");

    m.def("model_tags", &model_tags);

    m.def(
        "two_sample_lrt",
        [](double case1, double case2, double control1, double control2, double missing_case,
           double missing_control) {
            auto u = TwoSampleCountsModel::make_unit(case1, case2, control1, control2, missing_case, missing_control);
            auto r = two_sample_lrt(*u);
            return py::dict(py::arg("chi2_obs") = r.chi2_obs, py::arg("chi2_joint_em") = r.chi2_joint_em,
                            py::arg("chi2_separate_em") = r.chi2_separate_em, py::arg("pooled") = r.pooled,
                            py::arg("case_freq") = r.case_freq, py::arg("control_freq") = r.control_freq);
        },
        py::arg("case1"), py::arg("case2"), py::arg("control1"), py::arg("control2"), py::arg("missing_case"),
        py::arg("missing_control"));

    m.def(
        "bernoulli_statistics",
        [](long successes, long n_observed, long n_total, double p0) {
            auto s = bernoulli_statistics(successes, n_observed, n_total, p0);
            return py::dict(py::arg("t_ob") = s.t_ob, py::arg("t_alt") = s.t_alt, py::arg("t_null") = s.t_null,
                            py::arg("r_hat_alt") = s.r_hat_alt, py::arg("r_hat_null") = s.r_hat_null,
                            py::arg("boundary") = s.boundary, py::arg("degenerate") = s.degenerate);
        },
        py::arg("successes"), py::arg("n_observed"), py::arg("n_total"), py::arg("p0"));

    m.def(
        "normal_closed_forms",
        [](std::vector<double> observed, long n_total, double mu0) {
            auto u = NormalMeanModel::make_unit(std::move(observed), n_total);
            auto c = normal_closed_forms(*u, mu0);
            return py::dict(py::arg("ri1") = c.ri1, py::arg("ri0") = c.ri0, py::arg("bi0") = c.bi0,
                            py::arg("bi_s") = c.bi_s, py::arg("t0") = c.t0, py::arg("r") = c.r);
        },
        py::arg("observed"), py::arg("n_total"), py::arg("mu0"));

    m.def(
        "entropy_measure",
        [](const std::vector<std::vector<double>>& families) {
            auto r = entropy_measure(families);
            return py::dict(py::arg("per_family") = r.per_family, py::arg("global") = r.global,
                            py::arg("excluded") = r.excluded);
        },
        py::arg("families"));
}
