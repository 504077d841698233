#include "spmtnet/commands.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"
#include "spmtnet/truth.hpp"

namespace spmtnet::app {

using nlohmann::json;

CellParameters load_cell(const fs::path& params, const SolverOverrides& solver)
{
    CellParameters p = load_parameters(params);
    if (solver.N_r)
        p.solver.N_r = *solver.N_r;
    if (solver.dt)
        p.solver.dt = *solver.dt;
    p.validate();
    return p;
}

GenDataResult gen_data(const GenDataOptions& o, std::ostream& log)
{
    const CellParameters p = load_cell(o.params, o.solver);
    const truth::TruthConfig cfg = truth::load_truth_config(o.truth, p, o.seed);
    const truth::DatasetBundle bundle = truth::build_datasets(cfg.truth, p, cfg.split);

    GenDataResult r;
    r.manifest_sha256 =
        truth::write_bundle(o.out, bundle, parameters_hash(p), truth::truth_hash(cfg), cfg.seed);
    r.train_entries = bundle.train.size();
    r.test_entries = bundle.test.size();
    for (const auto* split : {&bundle.train, &bundle.test})
        for (const truth::Dataset& d : *split) {
            r.rows += d.records.size();
            fmt::print(log, "{:<5} {:<8} soc0={:<5} rows={:<6} truth={} spmt={}\n", d.info.split,
                       d.info.profile.label, io::format_double(d.info.soc0), d.records.size(),
                       d.info.truth_termination, d.info.spmt_termination);
        }
    fmt::print(log, "wrote {} train + {} test datasets ({} rows) to {}\nmanifest sha256 {}\n",
               r.train_entries, r.test_entries, r.rows, o.out.string(), r.manifest_sha256);
    return r;
}

namespace {

truth::Manifest load_matching_bundle(const fs::path& dir, const CellParameters& p)
{
    truth::Manifest m = truth::load_bundle(dir);
    const std::string want = parameters_hash(p);
    if (m.doc.value("params_sha256", std::string()) != want)
        throw FormatError(dir.string() + ": datasets were generated with different cell parameters");
    return m;
}

} // namespace

std::string default_model_name(hybrid::Wiring w, hybrid::FeatureSet f)
{
    std::string s = hybrid::to_string(w);
    if (f == hybrid::FeatureSet::no_state)
        s += "-no-state";
    return s;
}

std::string history_csv(const std::vector<fnn::EpochStats>& history)
{
    std::string out = "epoch,train_rmse_mV,val_rmse_mV\n";
    for (const fnn::EpochStats& s : history)
        out += std::to_string(s.epoch) + ',' + io::format_double(1e3 * s.train_rmse) + ',' +
               io::format_double(1e3 * s.val_rmse) + '\n';
    return out;
}

TrainOutput train(const TrainOptions& o, std::ostream& log)
{
    const CellParameters p = load_cell(o.params, o.solver);
    const truth::Manifest data = load_matching_bundle(o.data, p);

    hybrid::HybridTrainConfig cfg;
    if (o.config) {
        json j;
        try {
            j = json::parse(io::read_file(*o.config));
        } catch (const json::exception& e) {
            throw FormatError(o.config->string() + ": " + e.what());
        }
        cfg = hybrid::hybrid_train_config_from_json(j);
    }
    if (o.features)
        cfg.features = *o.features;
    if (o.seed)
        cfg.fnn.seed = *o.seed;
    if (o.epochs)
        cfg.fnn.epochs = *o.epochs;
    cfg.validate();
    if (cfg.fnn.epochs == 0)
        fmt::print(log, "warning: 0 epochs, writing the untrained model\n");

    TrainOutput out;
    out.training = hybrid::train_hybrid(o.wiring, data.train, p, cfg);
    out.training.model.provenance["manifest_sha256"] = data.sha256;

    const std::string name = o.name.empty() ? default_model_name(o.wiring, cfg.features) : o.name;
    out.model_file = o.out / (name + ".json");
    out.history_file = o.out / (name + "_history.csv");
    io::write_file_atomic(out.model_file, hybrid::to_json(out.training.model).dump(1) + "\n");
    io::write_file_atomic(out.history_file, history_csv(out.training.history));

    const fnn::EpochStats& best =
        out.training.history[static_cast<std::size_t>(out.training.best_epoch)];
    fmt::print(log,
               "{}: {} train rows, {} validation rows, best epoch {} of {} "
               "(train {:.2f} mV, val {:.2f} mV)\nwrote {}\n",
               name, out.training.train_rows, out.training.val_rows, out.training.best_epoch,
               out.training.history.back().epoch, 1e3 * best.train_rmse, 1e3 * best.val_rmse,
               out.model_file.string());
    return out;
}

std::vector<eval::EvalReport> evaluate(const EvalOptions& o, std::ostream& log)
{
    const CellParameters p = load_cell(o.params, o.solver);
    const truth::Manifest data = load_matching_bundle(o.data, p);
    if (o.models.empty())
        throw FormatError("eval: no model files given");
    for (const std::string& s : o.splits)
        if (s != "train" && s != "test")
            throw FormatError("eval: unknown split '" + s + "'");

    std::vector<hybrid::HybridModel> models;
    for (const fs::path& path : o.models)
        models.push_back(hybrid::load_hybrid(path, p));

    std::vector<eval::EvalReport> reports;
    for (std::size_t m = 0; m < models.size(); ++m) {
        const std::string stem = o.models[m].stem().string();
        const std::string model_sha = io::file_sha256(o.models[m]);
        for (const std::string& split : o.splits) {
            const auto& sets = split == "train" ? data.train : data.test;
            eval::MatrixResult r = eval::run_matrix(models[m], sets, split, stem, o.threads);
            r.report.provenance["model_sha256"] = model_sha;
            r.report.provenance["manifest_sha256"] = data.sha256;

            const std::string base = stem + "_" + split;
            io::write_file_atomic(o.out / (base + "_report.csv"), eval::report_csv(r.report));
            const std::string table = eval::report_table(r.report);
            io::write_file_atomic(o.out / (base + "_report.txt"), table);
            for (const eval::PlotSeries& s : r.plots)
                if (!s.t.empty())
                    io::write_file_atomic(o.out / "plots" / stem / split / s.info.file_name(),
                                          eval::plot_csv(s));
            fmt::print(log, "{}\n", table);
            reports.push_back(std::move(r.report));
        }
    }
    return reports;
}

CurrentProfile parse_profile(const std::string& text, double capacity_Ah, std::optional<double> t_end)
{
    if (text == "rest") {
        CurrentProfile p;
        p.spec.kind = ProfileKind::constant;
        p.spec.label = "REST";
        p.spec.t_end = t_end.value_or(3600.0);
        if (!(p.spec.t_end > 0.0))
            throw DomainError("profile: t_end must be positive");
        p.capacity_Ah = capacity_Ah;
        p.current.assign(static_cast<std::size_t>(std::ceil(p.spec.t_end)), 0.0);
        return p;
    }
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw FormatError("profile '" + text + "': expected cc:<rate>, udds:<seed>, us06:<seed> or rest");
    const std::string kind = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    if (kind == "cc") {
        double rate = 0.0;
        try {
            rate = io::parse_double(arg);
        } catch (const std::exception&) {
            throw FormatError("profile '" + text + "': bad C-rate");
        }
        if (!(rate > 0.0))
            throw DomainError("profile '" + text + "': C-rate must be positive");
        return make_constant_profile(rate, capacity_Ah, t_end.value_or(std::ceil(3600.0 / rate * 1.05)));
    }
    if (kind == "udds" || kind == "us06") {
        std::uint64_t seed = 0;
        try {
            std::size_t used = 0;
            seed = std::stoull(arg, &used);
            if (used != arg.size())
                throw FormatError("trailing characters");
        } catch (const std::exception&) {
            throw FormatError("profile '" + text + "': bad seed");
        }
        return make_drive_cycle(seed, drive_family_from_string(kind), capacity_Ah,
                                t_end.value_or(1200.0));
    }
    throw FormatError("profile '" + text + "': unknown kind '" + kind + "'");
}

std::string simulate(const SimulateOptions& o, std::ostream& out, std::ostream& log)
{
    const CellParameters p = load_cell(o.params, o.solver);
    const CurrentProfile profile = parse_profile(o.profile, p.capacity_Ah(), o.t_end);

    std::string csv;
    spmt::SimulationResult result;
    if (o.model) {
        const hybrid::HybridModel m = hybrid::load_hybrid(*o.model, p);
        hybrid::Prediction pred = hybrid::predict(m, o.soc0, profile, o.T_amb, o.T_amb);
        csv = spmt::trace_csv(pred.spmt, pred.v_hybrid);
        result = std::move(pred.spmt);
    } else {
        result = spmt::simulate(p, o.soc0, profile, o.T_amb, o.T_amb, profile.duration());
        csv = spmt::trace_csv(result);
    }
    if (o.out)
        io::write_file_atomic(*o.out, csv);
    else
        out << csv;
    fmt::print(log, "{} soc0={}: {} samples, termination {} at t={}\n", profile.spec.label,
               io::format_double(o.soc0), result.trace.size(), spmt::to_string(result.termination),
               io::format_double(result.stop_time));
    result.throw_if_saturated();
    return csv;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const DomainError*>(&e))
        return 1;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e))
        return 1;
    return 2;
}

} // namespace spmtnet::app
