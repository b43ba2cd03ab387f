#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "eegalign/alignment.hpp"
#include "eegalign/archive.hpp"
#include "eegalign/cli/config.hpp"
#include "eegalign/cli/run.hpp"
#include "eegalign/error.hpp"
#include "eegalign/harness/metrics.hpp"
#include "eegalign/harness/protocol.hpp"
#include "eegalign/harness/report.hpp"
#include "eegalign/preprocess.hpp"
#include "eegalign/spd.hpp"
#include "eegalign/synth.hpp"

namespace py = pybind11;
using namespace eegalign;

namespace {

spd::SPDMatrix spd_of(const Eigen::MatrixXd& m) { return spd::SPDMatrix(m); }

std::vector<spd::SPDMatrix> spds_of(const std::vector<Eigen::MatrixXd>& ms)
{
    std::vector<spd::SPDMatrix> out;
    out.reserve(ms.size());
    for (const auto& m : ms)
        out.emplace_back(m);
    return out;
}

std::vector<Eigen::MatrixXd> values_of(const std::vector<spd::SPDMatrix>& ps)
{
    std::vector<Eigen::MatrixXd> out;
    out.reserve(ps.size());
    for (const auto& p : ps)
        out.push_back(p.values());
    return out;
}

std::vector<Trial> trials_of(const std::vector<Eigen::MatrixXd>& data, double fs, TrialKind kind)
{
    std::vector<Trial> out;
    for (const auto& d : data) {
        Trial t;
        t.data = d;
        t.fs = fs;
        t.kind = kind;
        out.push_back(std::move(t));
    }
    return out;
}

SynthConfig synth_config(const std::string& json_text, std::uint64_t seed)
{
    const auto j = nlohmann::json::parse(json_text);
    const auto rc = cli::parse_run_config("synth", {{"synth", j}}, ".", "unused", seed, std::nullopt);
    return std::get<cli::SynthCommand>(rc.body).synth;
}

harness::PipelineSpec pipeline_spec(const std::string& json_text)
{
    return cli::pipeline_from_json(nlohmann::json::parse(json_text), "pipeline");
}

harness::OnlineConfig online_config(const std::string& json_text)
{
    const auto j = nlohmann::json::parse(json_text);
    const auto rc = cli::parse_run_config("eval-online",
                                          {{"synth", nlohmann::json::object()},
                                           {"pipelines", {{{"model", "MDRM"}}}},
                                           {"online", j}},
                                          ".", "unused", std::nullopt, std::nullopt);
    return *std::get<cli::EvalCommand>(rc.body).online;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Euclidean and Riemannian alignment for cross-subject EEG decoding";

    static py::exception<Error> error_type(m, "EegAlignError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
            PyErr_SetString(error_type.ptr(), msg.c_str());
        }
    });

    py::enum_<TrialKind>(m, "TrialKind").value("task", TrialKind::Task).value("resting", TrialKind::Resting);
    py::enum_<TaskKind>(m, "TaskKind").value("MI", TaskKind::MI).value("ERP", TaskKind::ERP);

    py::class_<Trial>(m, "Trial")
        .def(py::init<>())
        .def_readwrite("data", &Trial::data)
        .def_readwrite("fs", &Trial::fs)
        .def_readwrite("label", &Trial::label)
        .def_readwrite("subject", &Trial::subject)
        .def_readwrite("kind", &Trial::kind)
        .def("__eq__", &Trial::operator==);

    py::class_<SubjectRecord>(m, "SubjectRecord")
        .def(py::init<>())
        .def_readwrite("id", &SubjectRecord::id)
        .def_readwrite("trials", &SubjectRecord::trials)
        .def_readwrite("resting", &SubjectRecord::resting)
        .def_readwrite("channel_names", &SubjectRecord::channel_names);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("subjects", &Dataset::subjects)
        .def_readwrite("label_map", &Dataset::label_map)
        .def_readwrite("task_kind", &Dataset::task_kind)
        .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

    m.def("load_archive", &load_archive, py::arg("path"));
    m.def("save_archive", &save_archive, py::arg("dataset"), py::arg("path"));
    m.def(
        "synth_mi", [](const std::string& cfg, std::uint64_t seed) { return synth_mi(synth_config(cfg, seed)); },
        py::arg("config_json"), py::arg("seed"));
    m.def(
        "synth_erp", [](const std::string& cfg, std::uint64_t seed) { return synth_erp(synth_config(cfg, seed)); },
        py::arg("config_json"), py::arg("seed"));

    m.def(
        "riemannian_distance",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return spd::riemannian_distance(spd_of(a), spd_of(b)); },
        py::arg("p1"), py::arg("p2"));
    m.def(
        "riemannian_mean",
        [](const std::vector<Eigen::MatrixXd>& ps, double tol, int max_iter) {
            const auto r = spd::riemannian_mean(spds_of(ps), {tol, max_iter});
            return py::make_tuple(r.mean.values(), r.iterations, r.converged);
        },
        py::arg("matrices"), py::arg("tol") = 1e-9, py::arg("max_iter") = 50);
    m.def(
        "arithmetic_mean", [](const std::vector<Eigen::MatrixXd>& ps) { return spd::arithmetic_mean(spds_of(ps)).values(); },
        py::arg("matrices"));
    m.def(
        "spd_power", [](const Eigen::MatrixXd& p, double a) { return spd::spd_power(spd_of(p), a).values(); },
        py::arg("matrix"), py::arg("alpha"));
    m.def("spd_log", [](const Eigen::MatrixXd& p) { return spd::spd_log(spd_of(p)); }, py::arg("matrix"));

    m.def(
        "covariance",
        [](const Eigen::MatrixXd& x, std::optional<double> shrink) {
            Trial t;
            t.data = x;
            t.fs = 1.0;
            return align::covariance(t, shrink ? std::optional(align::ShrinkageParam(*shrink)) : std::nullopt).values();
        },
        py::arg("trial"), py::arg("shrinkage") = py::none());
    m.def(
        "build_reference",
        [](const std::vector<Eigen::MatrixXd>& trials, const std::string& kind) {
            const auto k = align::reference_kind_from_string(kind);
            const auto ts = trials_of(trials, 1.0, align::uses_resting(k) ? TrialKind::Resting : TrialKind::Task);
            return align::build_reference(ts, k).matrix.values();
        },
        py::arg("trials"), py::arg("kind") = "EI");
    m.def(
        "ea_align",
        [](const std::vector<Eigen::MatrixXd>& trials, const Eigen::MatrixXd& ref) {
            const align::ReferenceMatrix r{spd_of(ref), align::ReferenceKind::EI, 1, std::nullopt};
            std::vector<Eigen::MatrixXd> out;
            for (const auto& t : align::ea_align(trials_of(trials, 1.0, TrialKind::Task), r))
                out.push_back(t.data);
            return out;
        },
        py::arg("trials"), py::arg("reference"));
    m.def(
        "ra_align",
        [](const std::vector<Eigen::MatrixXd>& covs, const Eigen::MatrixXd& ref) {
            const align::ReferenceMatrix r{spd_of(ref), align::ReferenceKind::RI, 1, std::nullopt};
            return values_of(align::ra_align(spds_of(covs), r));
        },
        py::arg("covariances"), py::arg("reference"));

    m.def(
        "design_fir_bandpass",
        [](int order, double low, double high, double fs) {
            return preprocess::design_fir_bandpass(order, {low, high}, fs).coefficients;
        },
        py::arg("order"), py::arg("low_hz"), py::arg("high_hz"), py::arg("fs"));
    m.def(
        "filter_causal",
        [](const Eigen::MatrixXd& signal, double fs, int order, double low, double high) {
            return preprocess::filter_causal(signal, fs, preprocess::design_fir_bandpass(order, {low, high}, fs));
        },
        py::arg("signal"), py::arg("fs"), py::arg("order"), py::arg("low_hz"), py::arg("high_hz"));

    m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& l) { return harness::accuracy(p, l); });
    m.def("balanced_accuracy",
          [](const std::vector<int>& p, const std::vector<int>& l) { return harness::balanced_accuracy(p, l); });
    m.def(
        "bca",
        [](int m_pos, int m_neg, int n_pos, int n_neg) { return harness::bca({m_pos, m_neg, n_pos, n_neg}); },
        py::arg("m_pos"), py::arg("m_neg"), py::arg("n_pos"), py::arg("n_neg"));
    m.def("auc_curve",
          [](const std::vector<double>& x, const std::vector<double>& y) { return harness::auc_curve(x, y); });
    m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = harness::paired_t_test(a, b);
        return py::make_tuple(r.t, r.p, r.df);
    });

    m.def(
        "loso_eval_json",
        [](const Dataset& ds, const std::string& pipeline, std::uint64_t seed, int threads) {
            py::gil_scoped_release release;
            return harness::to_json(harness::loso_eval(ds, pipeline_spec(pipeline), seed, threads)).dump();
        },
        py::arg("dataset"), py::arg("pipeline_json"), py::arg("seed"), py::arg("threads") = 1);
    m.def(
        "online_eval_json",
        [](const Dataset& ds, const std::string& pipeline, const std::string& online, int threads) {
            const auto cfg = online_config(online);
            const auto spec = pipeline_spec(pipeline);
            py::gil_scoped_release release;
            return harness::to_json(harness::online_eval(ds, spec, cfg, threads)).dump();
        },
        py::arg("dataset"), py::arg("pipeline_json"), py::arg("online_json"), py::arg("threads") = 1);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"eegalign"};
            for (const auto& a : args)
                argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
