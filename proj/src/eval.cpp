#include "spmtnet/eval.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet::eval {

double rmse_mv(std::span<const double> v_true, std::span<const double> v_model)
{
    if (v_true.size() != v_model.size())
        throw DimensionError("rmse: series lengths differ");
    if (v_true.empty())
        throw DimensionError("rmse: empty series");
    double s = 0.0;
    for (std::size_t i = 0; i < v_true.size(); ++i) {
        const double e = v_true[i] - v_model[i];
        s += e * e;
    }
    return 1e3 * std::sqrt(s / static_cast<double>(v_true.size()));
}

std::optional<double> rer(double rmse_spmt, double rmse_hybrid)
{
    if (!(rmse_spmt > 0.0))
        return std::nullopt;
    return (rmse_spmt - rmse_hybrid) / rmse_spmt * 100.0;
}

bool EvalReport::all_failed() const
{
    for (const EvalRow& r : rows)
        if (r.ok())
            return false;
    return true;
}

const EvalRow* EvalReport::find_pooled(const std::string& profile) const
{
    for (const EvalRow& r : pooled)
        if (r.profile == profile)
            return &r;
    return nullptr;
}

bool is_high_c(const ProfileSpec& spec)
{
    return spec.kind == ProfileKind::constant && spec.c_rate >= 3.0;
}

namespace {

struct Cell
{
    EvalRow row;
    PlotSeries plot;
    double sq_spmt = 0.0; // sums of squared errors in V^2
    double sq_hybrid = 0.0;
};

Cell evaluate_cell(const hybrid::HybridModel& model, const truth::Dataset& d)
{
    Cell c;
    c.row.profile = d.info.profile.label;
    c.row.spec = d.info.profile;
    c.row.soc0 = d.info.soc0;
    c.plot.info = d.info;
    try {
        const CurrentProfile profile = make_profile(d.info.profile, model.spmt_params.capacity_Ah());
        const hybrid::Prediction pred =
            hybrid::predict(model, d.info.soc0, profile, d.info.T_amb, d.info.T_amb);
        const auto& trace = pred.spmt.trace;
        const std::size_t n = std::min(trace.size(), d.records.size());
        if (n == 0)
            throw DimensionError("no samples inside the voltage window");
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(trace[i].t - d.records[i].t) > 1e-9)
                throw DimensionError("prediction and dataset time grids differ");
            c.plot.t.push_back(trace[i].t);
            c.plot.V_true.push_back(d.records[i].V_true);
            c.plot.V_spmt.push_back(trace[i].V);
            c.plot.V_hybrid.push_back(pred.v_hybrid[i]);
        }
        c.row.samples = n;
        c.row.partial = trace.size() < d.records.size();
        c.row.rmse_spmt = rmse_mv(c.plot.V_true, c.plot.V_spmt);
        c.row.rmse_hybrid = rmse_mv(c.plot.V_true, c.plot.V_hybrid);
        c.row.rer = rer(c.row.rmse_spmt, c.row.rmse_hybrid);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = c.plot.V_true[i] - c.plot.V_spmt[i];
            const double b = c.plot.V_true[i] - c.plot.V_hybrid[i];
            c.sq_spmt += a * a;
            c.sq_hybrid += b * b;
        }
    } catch (const std::exception& e) {
        c.row.error = e.what();
        c.row.samples = 0;
        c.plot = PlotSeries{d.info, {}, {}, {}, {}};
    }
    return c;
}

std::string column_heading(const hybrid::HybridModel& m)
{
    std::string s = m.wiring == hybrid::Wiring::residual ? "HYBRID-I" : "HYBRID-II";
    if (m.features == hybrid::FeatureSet::no_state)
        s += " no-state";
    return s;
}

} // namespace

MatrixResult run_matrix(const hybrid::HybridModel& model, std::span<const truth::Dataset> datasets,
                        const std::string& split, const std::string& model_label, int threads)
{
    std::vector<Cell> cells(datasets.size());
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(datasets.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < datasets.size(); ++i)
            cells[i] = evaluate_cell(model, datasets[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < datasets.size(); i = next++)
                    cells[i] = evaluate_cell(model, datasets[i]);
            });
    }

    MatrixResult out;
    EvalReport& r = out.report;
    r.model = model_label;
    r.split = split;
    r.column = column_heading(model);
    r.provenance = {{"wiring", hybrid::to_string(model.wiring)},
                    {"features", hybrid::to_string(model.features)},
                    {"params_sha256", parameters_hash(model.spmt_params)}};

    struct Pool
    {
        EvalRow row;
        double sq_spmt = 0.0, sq_hybrid = 0.0;
        bool any_failed = false;
    };
    std::vector<Pool> pools;
    std::map<std::string, std::size_t> index;
    for (Cell& c : cells) {
        auto [it, fresh] = index.try_emplace(c.row.profile, pools.size());
        if (fresh) {
            Pool p;
            p.row.profile = c.row.profile;
            p.row.spec = c.row.spec;
            pools.push_back(p);
        }
        Pool& p = pools[it->second];
        if (c.row.ok()) {
            p.row.samples += c.row.samples;
            p.sq_spmt += c.sq_spmt;
            p.sq_hybrid += c.sq_hybrid;
            p.row.partial = p.row.partial || c.row.partial;
        } else {
            p.any_failed = true;
        }
        r.rows.push_back(std::move(c.row));
        out.plots.push_back(std::move(c.plot));
    }

    double rer_sum = 0.0, rmse_sum = 0.0;
    int rer_n = 0, rmse_n = 0;
    for (Pool& p : pools) {
        if (p.row.samples == 0) {
            p.row.error = "every soc0 failed";
        } else {
            const double n = static_cast<double>(p.row.samples);
            p.row.rmse_spmt = 1e3 * std::sqrt(p.sq_spmt / n);
            p.row.rmse_hybrid = 1e3 * std::sqrt(p.sq_hybrid / n);
            p.row.rer = rer(p.row.rmse_spmt, p.row.rmse_hybrid);
            if (is_high_c(p.row.spec)) {
                rmse_sum += p.row.rmse_hybrid;
                ++rmse_n;
                if (p.row.rer) {
                    rer_sum += *p.row.rer;
                    ++rer_n;
                }
            }
        }
        r.pooled.push_back(p.row);
    }
    if (rer_n > 0)
        r.mean_high_c_rer = rer_sum / rer_n;
    if (rmse_n > 0)
        r.mean_high_c_rmse_hybrid = rmse_sum / rmse_n;
    return out;
}

namespace {

std::string fixed2(double v)
{
    std::string s = fmt::format("{:.2f}", v);
    return s == "-0.00" ? "0.00" : s;
}

std::string rer_text(const std::optional<double>& v)
{
    return v ? fixed2(*v) : "n/a";
}

std::string status_text(const EvalRow& r)
{
    if (!r.ok()) {
        std::string msg = r.error;
        for (char& ch : msg)
            if (ch == ',' || ch == '\n' || ch == '"')
                ch = ' ';
        return "error: " + msg;
    }
    return r.partial ? "partial" : "ok";
}

std::string soc0_text(const EvalRow& r)
{
    return r.soc0 ? fixed2(*r.soc0) : "pooled";
}

} // namespace

std::string report_csv(const EvalReport& r)
{
    std::string out = "profile,soc0,samples,rmse_spmt_mV,rmse_hybrid_mV,rer_pct,status\n";
    auto line = [&](const EvalRow& row) {
        const bool ok = row.ok();
        out += fmt::format("{},{},{},{},{},{},{}\n", row.profile, soc0_text(row), row.samples,
                           ok ? fixed2(row.rmse_spmt) : "", ok ? fixed2(row.rmse_hybrid) : "",
                           ok ? rer_text(row.rer) : "", status_text(row));
    };
    for (const EvalRow& row : r.pooled)
        line(row);
    for (const EvalRow& row : r.rows)
        line(row);
    out += fmt::format("# model={} split={} mean_high_c_rer_pct={} mean_high_c_rmse_hybrid_mV={}\n",
                       r.model, r.split, rer_text(r.mean_high_c_rer),
                       r.mean_high_c_rmse_hybrid ? fixed2(*r.mean_high_c_rmse_hybrid) : "n/a");
    for (const auto& [k, v] : r.provenance.items())
        out += fmt::format("# {}={}\n", k, v.is_string() ? v.get<std::string>() : v.dump());
    return out;
}

std::string report_table(const EvalReport& r)
{
    const std::string hy = "RMSE (" + r.column + ")";
    const std::size_t w_hy = std::max<std::size_t>(hy.size(), 10);
    std::string out = fmt::format("{} on {} datasets\n\n", r.model, r.split);
    auto header = [&](const char* first) {
        out += fmt::format("{:<14} {:>7} {:>12} {:>{}} {:>9}\n", first, "soc0", "RMSE (SPMT)", hy,
                           w_hy, "RER (%)");
    };
    auto line = [&](const EvalRow& row) {
        if (!row.ok()) {
            out += fmt::format("{:<14} {:>7} {}\n", row.profile, soc0_text(row), status_text(row));
            return;
        }
        out += fmt::format("{:<14} {:>7} {:>12} {:>{}} {:>9}{}\n", row.profile, soc0_text(row),
                           fixed2(row.rmse_spmt), fixed2(row.rmse_hybrid), w_hy, rer_text(row.rer),
                           row.partial ? "  (partial)" : "");
    };
    header("Input profile");
    for (const EvalRow& row : r.pooled)
        line(row);
    out += "\n";
    header("Input profile");
    for (const EvalRow& row : r.rows)
        line(row);
    out += fmt::format("\nRMSE in mV. Mean RER over constant-current profiles >= 3C: {}\n",
                       rer_text(r.mean_high_c_rer));
    return out;
}

std::string plot_csv(const PlotSeries& p)
{
    std::string out = "t,V_true,V_spmt,V_hybrid\n";
    for (std::size_t i = 0; i < p.t.size(); ++i)
        out += io::format_double(p.t[i]) + ',' + io::format_double(p.V_true[i]) + ',' +
               io::format_double(p.V_spmt[i]) + ',' + io::format_double(p.V_hybrid[i]) + '\n';
    return out;
}

} // namespace spmtnet::eval
