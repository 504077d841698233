#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spmtnet/commands.hpp"
#include "spmtnet/errors.hpp"
#include "spmtnet/eval.hpp"

namespace py = pybind11;
using namespace spmtnet;

namespace {

app::SolverOverrides overrides(std::optional<int> n_r, std::optional<double> dt)
{
    return {n_r, dt};
}

py::dict trace_dict(const spmt::SimulationResult& r, const std::vector<double>* v_hybrid)
{
    std::vector<double> t, I, V, T, soc_surf, soc_bulk, q_gen;
    for (const spmt::SpmtOutput& s : r.trace) {
        t.push_back(s.t);
        I.push_back(s.I);
        V.push_back(s.V);
        T.push_back(s.T);
        soc_surf.push_back(s.soc_surf);
        soc_bulk.push_back(s.soc_bulk);
        q_gen.push_back(s.q_gen);
    }
    py::dict d;
    d["t"] = t;
    d["I"] = I;
    d["V"] = V;
    d["T"] = T;
    d["soc_surf"] = soc_surf;
    d["soc_bulk"] = soc_bulk;
    d["q_gen"] = q_gen;
    if (v_hybrid)
        d["V_hybrid"] = *v_hybrid;
    d["termination"] = spmt::to_string(r.termination);
    d["stop_time"] = r.stop_time;
    return d;
}

py::object optional_value(const std::optional<double>& v)
{
    return v ? py::object(py::float_(*v)) : py::none();
}

py::dict row_dict(const eval::EvalRow& r)
{
    py::dict d;
    d["profile"] = r.profile;
    d["soc0"] = optional_value(r.soc0);
    d["samples"] = r.samples;
    d["rmse_spmt_mV"] = r.rmse_spmt;
    d["rmse_hybrid_mV"] = r.rmse_hybrid;
    d["rer_pct"] = optional_value(r.rer);
    d["partial"] = r.partial;
    d["error"] = r.error;
    return d;
}

py::dict report_dict(const eval::EvalReport& r)
{
    py::list rows, pooled;
    for (const auto& row : r.rows)
        rows.append(row_dict(row));
    for (const auto& row : r.pooled)
        pooled.append(row_dict(row));
    py::dict d;
    d["model"] = r.model;
    d["split"] = r.split;
    d["column"] = r.column;
    d["rows"] = rows;
    d["pooled"] = pooled;
    d["mean_high_c_rer_pct"] = optional_value(r.mean_high_c_rer);
    d["mean_high_c_rmse_hybrid_mV"] = optional_value(r.mean_high_c_rmse_hybrid);
    return d;
}

py::dict simulate(const std::filesystem::path& params, const std::string& profile, double soc0,
                  double T_amb, std::optional<double> t_end, std::optional<std::filesystem::path> model,
                  std::optional<int> n_r, std::optional<double> dt)
{
    const CellParameters p = app::load_cell(params, overrides(n_r, dt));
    const CurrentProfile prof = app::parse_profile(profile, p.capacity_Ah(), t_end);
    if (model) {
        const hybrid::HybridModel m = hybrid::load_hybrid(*model, p);
        const hybrid::Prediction pred = hybrid::predict(m, soc0, prof, T_amb, T_amb);
        pred.spmt.throw_if_saturated();
        return trace_dict(pred.spmt, &pred.v_hybrid);
    }
    const spmt::SimulationResult r = spmt::simulate(p, soc0, prof, T_amb, T_amb, prof.duration());
    r.throw_if_saturated();
    return trace_dict(r, nullptr);
}

py::dict gen_data(const std::filesystem::path& params, const std::filesystem::path& truth,
                  const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                  std::optional<int> n_r, std::optional<double> dt)
{
    std::ostringstream log;
    app::GenDataResult r;
    {
        py::gil_scoped_release release;
        r = app::gen_data({params, truth, out, seed, overrides(n_r, dt)}, log);
    }
    py::dict d;
    d["manifest_sha256"] = r.manifest_sha256;
    d["train_entries"] = r.train_entries;
    d["test_entries"] = r.test_entries;
    d["rows"] = r.rows;
    d["log"] = log.str();
    return d;
}

py::dict train(const std::filesystem::path& params, const std::filesystem::path& data,
               const std::filesystem::path& out, const std::string& wiring,
               std::optional<std::filesystem::path> config, std::optional<std::string> features,
               std::optional<std::uint64_t> seed, std::optional<int> epochs, const std::string& name,
               std::optional<int> n_r, std::optional<double> dt)
{
    app::TrainOptions o;
    o.params = params;
    o.data = data;
    o.out = out;
    o.config = config;
    o.wiring = hybrid::wiring_from_string(wiring);
    if (features)
        o.features = hybrid::feature_set_from_string(*features);
    o.seed = seed;
    o.epochs = epochs;
    o.name = name;
    o.solver = overrides(n_r, dt);
    std::ostringstream log;
    app::TrainOutput r;
    {
        py::gil_scoped_release release;
        r = app::train(o, log);
    }
    std::vector<double> train_rmse, val_rmse;
    for (const fnn::EpochStats& s : r.training.history) {
        train_rmse.push_back(1e3 * s.train_rmse);
        val_rmse.push_back(1e3 * s.val_rmse);
    }
    py::dict d;
    d["model_file"] = r.model_file;
    d["history_file"] = r.history_file;
    d["best_epoch"] = r.training.best_epoch;
    d["train_rows"] = r.training.train_rows;
    d["val_rows"] = r.training.val_rows;
    d["train_rmse_mV"] = train_rmse;
    d["val_rmse_mV"] = val_rmse;
    d["log"] = log.str();
    return d;
}

py::list evaluate(const std::filesystem::path& params, const std::filesystem::path& data,
                  const std::vector<std::filesystem::path>& models, const std::filesystem::path& out,
                  const std::vector<std::string>& splits, int threads, std::optional<int> n_r,
                  std::optional<double> dt)
{
    app::EvalOptions o{params, data, models, out, splits, threads, overrides(n_r, dt)};
    std::ostringstream log;
    std::vector<eval::EvalReport> reports;
    {
        py::gil_scoped_release release;
        reports = app::evaluate(o, log);
    }
    py::list l;
    for (const auto& r : reports)
        l.append(report_dict(r));
    return l;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "SPMT electrochemical-thermal model with hybrid neural-network correction";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<SaturationError>(m, "SaturationError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

    m.def("parameters_hash",
          [](const std::filesystem::path& path) { return parameters_hash(load_parameters(path)); },
          py::arg("params"), "SHA-256 of the canonical parameter JSON.");
    m.def("capacity_ah",
          [](const std::filesystem::path& path) { return load_parameters(path).capacity_Ah(); },
          py::arg("params"));

    m.def("simulate", &simulate, py::arg("params"), py::arg("profile") = "cc:1", py::arg("soc0") = 1.0,
          py::arg("T_amb") = 298.15, py::arg("t_end") = py::none(), py::arg("model") = py::none(),
          py::arg("n_r") = py::none(), py::arg("dt") = py::none(),
          "Run one SPMT simulation; adds V_hybrid when a model file is given.");
    m.def("gen_data", &gen_data, py::arg("params"), py::arg("truth"), py::arg("out"),
          py::arg("seed") = py::none(), py::arg("n_r") = py::none(), py::arg("dt") = py::none());
    m.def("train", &train, py::arg("params"), py::arg("data"), py::arg("out"),
          py::arg("wiring") = "hybrid-1", py::arg("config") = py::none(), py::arg("features") = py::none(),
          py::arg("seed") = py::none(), py::arg("epochs") = py::none(), py::arg("name") = "",
          py::arg("n_r") = py::none(), py::arg("dt") = py::none());
    m.def("evaluate", &evaluate, py::arg("params"), py::arg("data"), py::arg("models"), py::arg("out"),
          py::arg("splits") = std::vector<std::string>{"train", "test"}, py::arg("threads") = 1,
          py::arg("n_r") = py::none(), py::arg("dt") = py::none());

    m.def(
        "rmse_mv",
        [](const std::vector<double>& a, const std::vector<double>& b) { return eval::rmse_mv(a, b); },
        py::arg("v_true"), py::arg("v_model"), "RMSE of two voltage series in volts, in mV.");
    m.def("rer", &eval::rer, py::arg("rmse_spmt"), py::arg("rmse_hybrid"),
          "Relative error reduction in percent, or None when rmse_spmt is not positive.");
}
