#include "spmtnet/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet::hybrid {

using nlohmann::json;

std::string to_string(Wiring w)
{
    return w == Wiring::residual ? "hybrid-1" : "hybrid-2";
}

Wiring wiring_from_string(const std::string& s)
{
    if (s == "hybrid-1")
        return Wiring::residual;
    if (s == "hybrid-2")
        return Wiring::cascade;
    throw FormatError("unknown wiring '" + s + "' (expected hybrid-1 or hybrid-2)");
}

std::string to_string(FeatureSet f)
{
    return f == FeatureSet::full ? "full" : "no-state";
}

FeatureSet feature_set_from_string(const std::string& s)
{
    if (s == "full")
        return FeatureSet::full;
    if (s == "no-state")
        return FeatureSet::no_state;
    throw FormatError("unknown feature set '" + s + "'");
}

int feature_count(FeatureSet f)
{
    return f == FeatureSet::full ? 5 : 3;
}

std::vector<std::string> feature_names(FeatureSet f)
{
    if (f == FeatureSet::full)
        return {"I", "T", "soc0", "soc_bulk", "soc_surf"};
    return {"I", "T", "soc0"};
}

namespace {

void fill_row(Eigen::MatrixXd& X, Eigen::Index r, const FeatureVector& x, FeatureSet f)
{
    X(r, 0) = x.I;
    X(r, 1) = x.T;
    X(r, 2) = x.soc0;
    if (f == FeatureSet::full) {
        X(r, 3) = x.soc_bulk;
        X(r, 4) = x.soc_surf;
    }
}

double target(const truth::Record& r, Wiring w)
{
    return w == Wiring::residual ? r.V_true - r.V_spmt : r.V_true;
}

std::vector<std::size_t> thinned_rows(std::size_t n, std::size_t cap)
{
    std::vector<std::size_t> rows;
    const std::size_t stride = (cap == 0 || n <= cap) ? 1 : (n + cap - 1) / cap;
    for (std::size_t i = 0; i < n; i += stride)
        rows.push_back(i);
    return rows;
}

} // namespace

TrainingTable make_training_table(const truth::Dataset& dataset, Wiring wiring, FeatureSet features)
{
    TrainingTable t;
    const auto n = static_cast<Eigen::Index>(dataset.records.size());
    t.X.resize(n, feature_count(features));
    t.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const truth::Record& r = dataset.records[static_cast<std::size_t>(i)];
        fill_row(t.X, i, {r.I, r.T_spmt, r.soc0, r.soc_bulk, r.soc_surf}, features);
        t.y(i) = target(r, wiring);
    }
    return t;
}

Prediction predict(const HybridModel& model, double soc0, const CurrentProfile& profile,
                   double T0, double T_amb)
{
    if (model.fnn.input_dim() != feature_count(model.features))
        throw DimensionError("predict: network input width does not match the feature set");
    Prediction p;
    p.spmt = spmt::simulate(model.spmt_params, soc0, profile, T0, T_amb, profile.duration());
    p.partial = p.spmt.stopped_early();

    const auto& trace = p.spmt.trace;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(trace.size()), feature_count(model.features));
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const spmt::SpmtOutput& s = trace[i];
        fill_row(X, static_cast<Eigen::Index>(i), {s.I, s.T, soc0, s.soc_bulk, s.soc_surf},
                 model.features);
    }
    p.v_hybrid.resize(trace.size());
    if (trace.empty())
        return p;
    const Eigen::VectorXd g = fnn::predict(model.fnn, X);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double out = g(static_cast<Eigen::Index>(i));
        p.v_hybrid[i] = (model.wiring == Wiring::residual) ? trace[i].V + out : out;
    }
    return p;
}

void HybridTrainConfig::validate() const
{
    fnn.validate();
    if (!(val_fraction >= 0.0 && val_fraction < 1.0))
        throw DomainError("train_hybrid: val_fraction must lie in [0, 1)");
    for (int h : hidden)
        if (h <= 0)
            throw DomainError("train_hybrid: hidden widths must be positive");
}

json to_json(const HybridTrainConfig& c)
{
    return {{"fnn", fnn::to_json(c.fnn)},
            {"hidden", c.hidden},
            {"features", to_string(c.features)},
            {"val_fraction", c.val_fraction},
            {"max_rows_per_trace", c.max_rows_per_trace}};
}

HybridTrainConfig hybrid_train_config_from_json(const json& j, HybridTrainConfig c)
{
    if (auto it = j.find("fnn"); it != j.end())
        c.fnn = fnn::train_config_from_json(*it, c.fnn);
    c.hidden = j.value("hidden", c.hidden);
    if (auto it = j.find("features"); it != j.end())
        c.features = feature_set_from_string(it->get<std::string>());
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.max_rows_per_trace = j.value("max_rows_per_trace", c.max_rows_per_trace);
    c.validate();
    return c;
}

HybridTraining train_hybrid(Wiring wiring, std::span<const truth::Dataset> train_sets,
                            const CellParameters& spmt_params, const HybridTrainConfig& config)
{
    config.validate();
    if (train_sets.empty())
        throw DimensionError("train_hybrid: no training datasets");

    const int width = feature_count(config.features);
    std::vector<FeatureVector> tr_x, va_x;
    std::vector<double> tr_y, va_y;
    // Separate stream from the SGD shuffle so changing one does not move the other.
    std::mt19937_64 rng(config.fnn.seed ^ 0x9e3779b97f4a7c15ULL);
    for (const truth::Dataset& d : train_sets) {
        std::vector<std::size_t> rows = thinned_rows(d.records.size(), config.max_rows_per_trace);
        std::vector<char> is_val(rows.size(), 0);
        const auto n_val = static_cast<std::size_t>(std::floor(config.val_fraction * rows.size()));
        std::vector<std::size_t> pick(rows.size());
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        std::shuffle(pick.begin(), pick.end(), rng);
        for (std::size_t i = 0; i < n_val; ++i)
            is_val[pick[i]] = 1;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const truth::Record& r = d.records[rows[i]];
            FeatureVector x{r.I, r.T_spmt, r.soc0, r.soc_bulk, r.soc_surf};
            if (is_val[i]) {
                va_x.push_back(x);
                va_y.push_back(target(r, wiring));
            } else {
                tr_x.push_back(x);
                tr_y.push_back(target(r, wiring));
            }
        }
    }
    if (tr_x.size() < 2)
        throw DimensionError("train_hybrid: fewer than two training rows");

    auto to_matrix = [&](const std::vector<FeatureVector>& xs, const std::vector<double>& ys,
                         Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        X.resize(static_cast<Eigen::Index>(xs.size()), width);
        y.resize(static_cast<Eigen::Index>(ys.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            fill_row(X, static_cast<Eigen::Index>(i), xs[i], config.features);
            y(static_cast<Eigen::Index>(i)) = ys[i];
        }
    };
    Eigen::MatrixXd X_tr, X_va;
    Eigen::VectorXd y_tr, y_va;
    to_matrix(tr_x, tr_y, X_tr, y_tr);
    to_matrix(va_x, va_y, X_va, y_va);

    std::vector<int> widths{width};
    widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
    widths.push_back(1);
    fnn::FnnModel init = fnn::make_model(widths, config.fnn.seed);
    init.norm = fnn::fit_normalization(X_tr);

    // Fit standardized targets, then fold the scale into the output layer.
    const double y_mean = y_tr.mean();
    const double y_std = std::max(std::sqrt((y_tr.array() - y_mean).square().mean()), 1e-12);
    const Eigen::VectorXd z_tr = (y_tr.array() - y_mean) / y_std;
    const Eigen::VectorXd z_va = (y_va.array() - y_mean) / y_std;
    fnn::TrainResult fit = fnn::train(std::move(init), X_tr, z_tr, X_va, z_va, config.fnn);
    fnn::Layer& last = fit.model.layers.back();
    last.W *= y_std;
    last.b = last.b * y_std + Eigen::VectorXd::Constant(last.b.size(), y_mean);
    for (fnn::EpochStats& s : fit.history) {
        s.train_rmse *= y_std;
        s.val_rmse *= y_std;
    }

    HybridTraining out;
    out.model.wiring = wiring;
    out.model.features = config.features;
    out.model.spmt_params = spmt_params;
    out.model.fnn = std::move(fit.model);
    out.model.provenance = {{"train_config", to_json(config)},
                            {"best_epoch", fit.best_epoch},
                            {"train_rows", tr_x.size()},
                            {"val_rows", va_x.size()}};
    out.history = std::move(fit.history);
    out.best_epoch = fit.best_epoch;
    out.train_rows = tr_x.size();
    out.val_rows = va_x.size();
    return out;
}

json to_json(const HybridModel& model)
{
    return {{"format", "spmtnet-hybrid/1"},
            {"wiring", to_string(model.wiring)},
            {"features", to_string(model.features)},
            {"feature_names", feature_names(model.features)},
            {"spmt_params_sha256", parameters_hash(model.spmt_params)},
            {"fnn", fnn::to_json(model.fnn)},
            {"provenance", model.provenance}};
}

HybridModel hybrid_from_json(const json& j, const CellParameters& spmt_params)
{
    HybridModel m;
    try {
        m.wiring = wiring_from_string(j.at("wiring").get<std::string>());
        m.features = feature_set_from_string(j.value("features", std::string("full")));
        const auto stored = j.at("spmt_params_sha256").get<std::string>();
        if (stored != parameters_hash(spmt_params))
            throw FormatError("hybrid model was trained with different SPMT parameters (" +
                              stored.substr(0, 12) + "...)");
        m.fnn = fnn::model_from_json(j.at("fnn"));
        m.provenance = j.value("provenance", json::object());
    } catch (const json::exception& e) {
        throw FormatError(std::string("hybrid model file: ") + e.what());
    }
    if (m.fnn.input_dim() != feature_count(m.features))
        throw FormatError("hybrid model file: network input width does not match feature set");
    m.spmt_params = spmt_params;
    return m;
}

HybridModel load_hybrid(const std::filesystem::path& path, const CellParameters& spmt_params)
{
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return hybrid_from_json(j, spmt_params);
}

} // namespace spmtnet::hybrid
