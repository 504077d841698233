// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "spmtnet/commands.hpp"
#include "spmtnet/errors.hpp"
#include "spmtnet/eval.hpp"
#include "spmtnet/fnn.hpp"
#include "spmtnet/io.hpp"
#include "spmtnet/spmt.hpp"

namespace fs = std::filesystem;
using namespace spmtnet;

namespace {

const fs::path kData = SPMTNET_DATA_DIR;
const fs::path kParams = kData / "params" / "lco_graphite.json";
const fs::path kTruth = kData / "truth" / "default.json";
const fs::path kTrain = kData / "config" / "train.json";

struct Outcome
{
    bool pass = false;
    std::string detail;
};

fs::path scratch_root()
{
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     fmt::format("spmtnet-acceptance-{}", std::random_device{}());
        fs::create_directories(p);
        return p;
    }();
    return root;
}

// ---------------------------------------------------------------- 1
Outcome rer_values()
{
    const double a = eval::rer(21.59, 2.87).value();
    const double b = eval::rer(10.92, 15.35).value();
    const bool ok = std::abs(a - 86.71) <= 0.01 && std::abs(b - (-40.57)) <= 0.01;
    return {ok, fmt::format("rer(21.59, 2.87) = {:.4f}, rer(10.92, 15.35) = {:.4f}", a, b)};
}

// ---------------------------------------------------------------- 2
double balance_error(std::span<const double> c, double c0_bulk, double flux_integral, double R,
                     double cmax)
{
    const double expected = c0_bulk - 3.0 / R * flux_integral;
    return std::abs(spmt::bulk_concentration(c) - expected) / cmax;
}

Outcome conservation()
{
    const CellParameters p = load_parameters(kParams);
    const double I = p.capacity_Ah();

    // Solver level: both particles under a constant 1C flux for 3600 steps of 1 s.
    double worst_solver = 0.0;
    for (spmt::Electrode e : {spmt::Electrode::positive, spmt::Electrode::negative}) {
        const ElectrodeParameters& ep = e == spmt::Electrode::positive ? p.pos : p.neg;
        const double theta0 = e == spmt::Electrode::positive ? 0.45 : 0.90;
        std::vector<double> c(static_cast<std::size_t>(p.solver.N_r), theta0 * ep.c_s_max);
        const double c0 = spmt::bulk_concentration(c);
        const double j = spmt::molar_flux(I, e, p);
        spmt::ParticleDiffusion solver(p.solver.N_r, ep.R_s, ep.c_s_max);
        for (int k = 0; k < 3600; ++k)
            solver.step(c, ep.D_s_ref, j, 1.0);
        worst_solver = std::max(worst_solver, balance_error(c, c0, j * 3600.0, ep.R_s, ep.c_s_max));
    }

    // Full model: 1C from a full cell until the profile or the voltage window ends.
    const CurrentProfile prof = make_constant_profile(1.0, p.capacity_Ah(), 3600.0);
    const double soc0 = 0.95;
    const spmt::SpmtState s0 = spmt::initial_state(p, soc0, p.T_ref);
    const spmt::SimulationResult r = spmt::simulate(p, soc0, prof, p.T_ref, p.T_ref, 3600.0);
    const double elapsed = r.final_state.t;
    double worst_model = 0.0;
    worst_model = std::max(worst_model,
                           balance_error(r.final_state.c_pos, spmt::bulk_concentration(s0.c_pos),
                                         spmt::molar_flux(I, spmt::Electrode::positive, p) * elapsed,
                                         p.pos.R_s, p.pos.c_s_max));
    worst_model = std::max(worst_model,
                           balance_error(r.final_state.c_neg, spmt::bulk_concentration(s0.c_neg),
                                         spmt::molar_flux(I, spmt::Electrode::negative, p) * elapsed,
                                         p.neg.R_s, p.neg.c_s_max));
    const bool ok = worst_solver < 1e-6 && worst_model < 1e-6 && elapsed > 3000.0;
    return {ok, fmt::format("max relative error {:.2e} over 3600 solver steps, {:.2e} over {} s of "
                            "full 1C simulation ({})",
                            worst_solver, worst_model, elapsed, spmt::to_string(r.termination))};
}

// ---------------------------------------------------------------- 3
Outcome grid_convergence()
{
    CellParameters coarse = load_parameters(kParams);
    CellParameters fine = coarse;
    fine.solver.N_r = 2 * coarse.solver.N_r;
    fine.solver.dt = coarse.solver.dt / 2.0;
    const double soc0 = 0.95;
    const CurrentProfile prof = make_constant_profile(1.0, coarse.capacity_Ah(), 3600.0);
    const auto a = spmt::simulate(coarse, soc0, prof, coarse.T_ref, coarse.T_ref, 3600.0);
    const auto b = spmt::simulate(fine, soc0, prof, fine.T_ref, fine.T_ref, 3600.0);

    double worst = 0.0;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        const std::size_t k = 2 * i;
        if (k >= b.trace.size())
            break;
        if (std::abs(b.trace[k].t - a.trace[i].t) > 1e-9)
            return {false, "time grids do not line up"};
        worst = std::max(worst, std::abs(a.trace[i].V - b.trace[k].V));
        ++compared;
    }
    const bool ok = compared > 3000 && worst < 1e-3;
    return {ok, fmt::format("max |dV| = {:.4f} mV over {} common samples", 1e3 * worst, compared)};
}

// ---------------------------------------------------------------- 4
Outcome analytic_identities()
{
    const CellParameters p = load_parameters(kParams);
    std::vector<std::string> failed;

    for (double psi : {2e-14, 1.0, 3.7e5})
        for (double E : {0.0, 5000.0, 3.5e4})
            if (spmt::arrhenius(psi, E, p.T_ref, p.T_ref, p.R_gas) != psi)
                failed.push_back("arrhenius");

    for (double soc0 : {0.1, 0.5, 0.9}) {
        const spmt::SpmtState s = spmt::initial_state(p, soc0, p.T_ref);
        const double ocv = p.pos.ocv(s.c_pos.back() / p.pos.c_s_max) -
                           p.neg.ocv(s.c_neg.back() / p.neg.c_s_max);
        if (spmt::terminal_voltage(s, 0.0, p).V != ocv)
            failed.push_back("rest voltage");
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e-3, 1e-3), pos(1e-3, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const double j = u(rng), i0 = pos(rng), T = 250.0 + 100.0 * pos(rng) / 10.0;
        if (spmt::overpotential(-j, i0, T, p.F, p.R_gas) != -spmt::overpotential(j, i0, T, p.F, p.R_gas)) {
            failed.push_back("overpotential oddness");
            break;
        }
    }

    // Rest with T0 above ambient: fit the decay rate over 2000 s.
    spmt::SpmtState s = spmt::initial_state(p, 0.5, 318.15);
    const double T_amb = 298.15;
    const double V = spmt::terminal_voltage(s, 0.0, p).V;
    const double dt = p.solver.dt;
    const int steps = 2000;
    for (int k = 0; k < steps; ++k)
        s.T = spmt::thermal_step(s, 0.0, V, p, T_amb, dt);
    const double rate = -std::log((s.T - T_amb) / (318.15 - T_amb)) / (steps * dt);
    const double exact = p.h_cell / p.heat_capacity();
    const double rel = std::abs(rate - exact) / exact;
    if (!(rel < 1e-3))
        failed.push_back("thermal relaxation");

    std::string detail = fmt::format("relaxation rate {:.6e} vs {:.6e} 1/s (rel {:.1e})", rate, exact, rel);
    for (const auto& f : failed)
        detail += "; failed: " + f;
    return {failed.empty(), detail};
}

// ---------------------------------------------------------------- 5
Outcome gradient_check()
{
    const std::vector<int> widths{5, 16, 16, 1};
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double h = 1e-5;
    double worst = 0.0;
    int points = 0, skipped = 0;
    for (std::uint64_t seed = 1; points < 100; ++seed) {
        fnn::FnnModel m = fnn::make_model(widths, seed);
        for (auto& layer : m.layers)
            for (Eigen::Index i = 0; i < layer.b.size(); ++i)
                layer.b(i) = 0.1 * n01(rng);
        m.norm.mean = Eigen::VectorXd::Zero(5);
        m.norm.std = Eigen::VectorXd::Ones(5);
        Eigen::MatrixXd X(8, 5);
        Eigen::VectorXd y(8);
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            for (Eigen::Index c = 0; c < X.cols(); ++c)
                X(r, c) = n01(rng);
            y(r) = n01(rng);
        }

        // Skip points that sit on a ReLU kink.
        bool kink = false;
        for (Eigen::Index r = 0; r < X.rows() && !kink; ++r) {
            Eigen::VectorXd z = X.row(r).transpose();
            for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
                const Eigen::VectorXd a = m.layers[l].W * z + m.layers[l].b;
                if ((a.array().abs() < 1e-6).any())
                    kink = true;
                z = a.cwiseMax(0.0);
            }
        }
        if (kink) {
            ++skipped;
            continue;
        }

        const fnn::Gradients g = fnn::backward(m, X, y);
        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = fnn::mse_loss(m, X, y);
            param = saved - h;
            const double down = fnn::mse_loss(m, X, y);
            param = saved;
            const double fd = (up - down) / (2.0 * h);
            const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8});
            worst = std::max(worst, rel);
        };
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            for (Eigen::Index i = 0; i < m.layers[l].W.size(); ++i)
                check(m.layers[l].W.data()[i], g.dW[l].data()[i]);
            for (Eigen::Index i = 0; i < m.layers[l].b.size(); ++i)
                check(m.layers[l].b(i), g.db[l](i));
        }
        ++points;
    }
    return {worst < 1e-4, fmt::format("max relative error {:.2e} over {} points ({} kink points skipped)",
                                      worst, points, skipped)};
}

// ---------------------------------------------------------------- pipeline

struct Pipeline
{
    fs::path root;
    std::vector<eval::EvalReport> reports; // hybrid-1 test, hybrid-2 test
};

Pipeline run_pipeline(const std::string& name)
{
    Pipeline pl;
    pl.root = scratch_root() / name;
    std::ostringstream log;

    app::GenDataOptions g;
    g.params = kParams;
    g.truth = kTruth;
    g.out = pl.root / "data";
    app::gen_data(g, log);

    std::vector<fs::path> models;
    for (hybrid::Wiring w : {hybrid::Wiring::residual, hybrid::Wiring::cascade}) {
        app::TrainOptions t;
        t.params = kParams;
        t.data = g.out;
        t.out = pl.root / "models";
        t.config = kTrain;
        t.wiring = w;
        models.push_back(app::train(t, log).model_file);
    }

    app::EvalOptions e;
    e.params = kParams;
    e.data = g.out;
    e.models = models;
    e.out = pl.root / "reports";
    e.splits = {"test"};
    pl.reports = app::evaluate(e, log);
    return pl;
}

const Pipeline& first_pipeline()
{
    static const Pipeline pl = run_pipeline("run-a");
    return pl;
}

// ---------------------------------------------------------------- 6
Outcome trend()
{
    const eval::EvalReport& r = first_pipeline().reports.at(0);
    std::string detail;
    bool ok = true;
    double previous = -1e300;
    for (const char* label : {"CC-1C", "CC-3C", "CC-5C", "CC-7C", "CC-10C"}) {
        const eval::EvalRow* row = r.find_pooled(label);
        if (!row || !row->ok() || !row->rer) {
            return {false, std::string("missing or failed row ") + label};
        }
        const double v = *row->rer;
        detail += fmt::format("{} {:.2f}% ", label, v);
        if (v < previous)
            ok = false;
        if (row->spec.c_rate >= 3.0 && v < 80.0)
            ok = false;
        previous = v;
    }
    for (const char* label : {"UDDS-B", "US06-B"}) {
        const eval::EvalRow* row = r.find_pooled(label);
        if (!row || !row->ok() || !row->rer)
            return {false, std::string("missing or failed row ") + label};
        detail += fmt::format("{} {:.2f}% ", label, *row->rer);
        if (!(*row->rer > 0.0))
            ok = false;
    }
    return {ok, detail + "(test split, pooled over soc0)"};
}

// ---------------------------------------------------------------- 7
Outcome parity()
{
    const auto& reports = first_pipeline().reports;
    const auto& h1 = reports.at(0);
    const auto& h2 = reports.at(1);
    if (!h1.mean_high_c_rer || !h2.mean_high_c_rer)
        return {false, "mean high-C RER unavailable"};
    const double gap = std::abs(*h1.mean_high_c_rer - *h2.mean_high_c_rer);
    return {gap <= 15.0, fmt::format("mean RER >= 3C: hybrid-1 {:.2f}%, hybrid-2 {:.2f}%, gap {:.2f} points",
                                     *h1.mean_high_c_rer, *h2.mean_high_c_rer, gap)};
}

// ---------------------------------------------------------------- 8
Outcome ablation()
{
    const fs::path data = first_pipeline().root / "data";
    const fs::path root = scratch_root() / "ablation";
    std::ostringstream log;
    double sum_full = 0.0, sum_ablated = 0.0;
    std::string detail;
    const int seeds = 5;
    for (int seed = 1; seed <= seeds; ++seed) {
        double mean[2] = {0.0, 0.0};
        int idx = 0;
        for (hybrid::FeatureSet f : {hybrid::FeatureSet::full, hybrid::FeatureSet::no_state}) {
            app::TrainOptions t;
            t.params = kParams;
            t.data = data;
            t.out = root;
            t.config = kTrain;
            t.features = f;
            t.seed = static_cast<std::uint64_t>(seed);
            t.name = fmt::format("{}-seed{}", app::default_model_name(t.wiring, f), seed);
            app::EvalOptions e;
            e.params = kParams;
            e.data = data;
            e.models = {app::train(t, log).model_file};
            e.out = root / "reports";
            e.splits = {"test"};
            const auto reports = app::evaluate(e, log);
            mean[idx++] = reports.at(0).mean_high_c_rmse_hybrid.value();
        }
        sum_full += mean[0];
        sum_ablated += mean[1];
        detail += fmt::format("seed {}: {:.2f}/{:.2f} ", seed, mean[0], mean[1]);
    }
    const double full = sum_full / seeds, ablated = sum_ablated / seeds;
    return {ablated > full,
            fmt::format("mean high-C test RMSE with state {:.2f} mV, without {:.2f} mV ({}mV, full/ablated)",
                        full, ablated, detail)};
}

// ---------------------------------------------------------------- 9
Outcome determinism()
{
    const Pipeline& a = first_pipeline();
    const Pipeline b = run_pipeline("run-b");
    std::size_t compared = 0;
    std::vector<std::string> differ;
    for (const char* sub : {"data", "models", "reports"}) {
        for (const auto& entry : fs::recursive_directory_iterator(a.root / sub)) {
            if (!entry.is_regular_file())
                continue;
            const fs::path rel = fs::relative(entry.path(), a.root);
            const fs::path other = b.root / rel;
            if (!fs::exists(other) || io::read_file(entry.path()) != io::read_file(other))
                differ.push_back(rel.string());
            ++compared;
        }
    }
    std::string detail = fmt::format("{} files compared byte for byte", compared);
    if (!differ.empty())
        detail += fmt::format(", {} differ (first: {})", differ.size(), differ.front());
    return {differ.empty() && compared > 0, detail};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"RER formula", rer_values},
        {"solver conservation", conservation},
        {"grid convergence", grid_convergence},
        {"analytic identities", analytic_identities},
        {"FNN gradient check", gradient_check},
        {"end-to-end trend", trend},
        {"HYBRID-II parity", parity},
        {"state-feed ablation", ablation},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << fmt::format("criterion {}: {} {} [{:.1f} s] {}\n", i + 1, o.pass ? "PASS" : "FAIL",
                                 criteria[i].first, secs, o.detail)
                  << std::flush;
        failures += o.pass ? 0 : 1;
    }
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
    return failures == 0 ? 0 : 1;
}
