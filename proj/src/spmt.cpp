#include "spmtnet/spmt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet::spmt {

namespace {

// Control volumes of the vertex-centred grid on the unit sphere, times 3.
std::vector<double> make_weights(int nodes)
{
    const double h = 1.0 / (nodes - 1);
    std::vector<double> w(static_cast<std::size_t>(nodes));
    auto cube = [](double x) { return x * x * x; };
    for (int i = 0; i < nodes; ++i) {
        const double lo = (i == 0) ? 0.0 : (i - 0.5) * h;
        const double hi = (i == nodes - 1) ? 1.0 : (i + 0.5) * h;
        w[static_cast<std::size_t>(i)] = cube(hi) - cube(lo);
    }
    return w;
}

double stoichiometry_for_soc(const ElectrodeParameters& e, double soc)
{
    return e.theta_0 + soc * (e.theta_100 - e.theta_0);
}

} // namespace

double arrhenius(double psi_ref, double activation_energy, double T_ref, double T, double R_gas)
{
    if (!(T > 0.0) || !(T_ref > 0.0))
        throw DomainError("arrhenius: temperatures must be positive");
    return psi_ref * std::exp(activation_energy / R_gas * (1.0 / T_ref - 1.0 / T));
}

double molar_flux(double current, Electrode electrode, const CellParameters& p)
{
    const ElectrodeParameters& e = (electrode == Electrode::positive) ? p.pos : p.neg;
    const double j = current / (e.a_s * p.F * p.A * e.L);
    return (electrode == Electrode::positive) ? -j : j;
}

double exchange_current_density(double c_ss, double k, double c_s_max, double c_e0,
                                double alpha_a, double alpha_c)
{
    if (!(c_ss > 0.0) || !(c_ss < c_s_max))
        throw SaturationError("surface concentration " + io::format_double(c_ss) +
                              " outside (0, " + io::format_double(c_s_max) + ")");
    return k * std::pow(c_e0, alpha_a) * std::pow(c_ss, alpha_c) *
           std::pow(c_s_max - c_ss, alpha_a);
}

double overpotential(double j_n, double i0, double T, double F, double R_gas)
{
    if (!(i0 > 0.0))
        throw KineticsError("overpotential: exchange current density must be positive");
    return 2.0 * R_gas * T / F * std::asinh(F * j_n / (2.0 * i0));
}

const std::vector<double>& shell_weights(int nodes)
{
    if (nodes < 2)
        throw DimensionError("shell_weights: need at least two nodes");
    static std::mutex mu;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(nodes);
    if (it == cache.end())
        it = cache.emplace(nodes, make_weights(nodes)).first;
    return it->second;
}

double bulk_concentration(std::span<const double> c)
{
    const auto& w = shell_weights(static_cast<int>(c.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        acc += w[i] * c[i];
    return acc;
}

ParticleDiffusion::ParticleDiffusion(int nodes, double radius, double c_s_max)
    : radius_(radius), c_s_max_(c_s_max), h_(1.0 / (nodes - 1))
{
    if (nodes < 3)
        throw DimensionError("ParticleDiffusion: need at least three nodes");
    if (!(radius > 0.0) || !(c_s_max > 0.0))
        throw DomainError("ParticleDiffusion: radius and c_s_max must be positive");
    weights_ = shell_weights(nodes);
    face_area_.resize(static_cast<std::size_t>(nodes - 1));
    for (int i = 0; i + 1 < nodes; ++i) {
        const double x = (i + 0.5) * h_;
        face_area_[static_cast<std::size_t>(i)] = x * x;
    }
    const auto n = static_cast<std::size_t>(nodes);
    lower_.resize(n);
    diag_.resize(n);
    upper_.resize(n);
    rhs_.resize(n);
    next_.resize(n);
}

void ParticleDiffusion::step(std::span<double> c, double D_s, double j_n, double dt)
{
    const std::size_t n = weights_.size();
    if (c.size() != n)
        throw DimensionError("ParticleDiffusion::step: grid length mismatch");
    if (!(dt > 0.0))
        throw DomainError("ParticleDiffusion::step: dt must be positive");

    // Semi-discrete system: dc_i/dt = kappa_i [A+ (c_{i+1}-c_i) - A- (c_i-c_{i-1})] + s_i
    // with kappa_i = 3 D / (R^2 h w_i) and s_{n-1} = -3 j_n / (R w_{n-1}).
    const double half = 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) {
        const double kappa = 3.0 * D_s / (radius_ * radius_ * h_ * weights_[i]);
        const double a_lo = (i > 0) ? kappa * face_area_[i - 1] : 0.0;
        const double a_hi = (i + 1 < n) ? kappa * face_area_[i] : 0.0;
        double lc = -(a_lo + a_hi) * c[i];
        if (i > 0)
            lc += a_lo * c[i - 1];
        if (i + 1 < n)
            lc += a_hi * c[i + 1];
        lower_[i] = -half * a_lo;
        upper_[i] = -half * a_hi;
        diag_[i] = 1.0 + half * (a_lo + a_hi);
        rhs_[i] = c[i] + half * lc;
    }
    rhs_[n - 1] -= dt * 3.0 * j_n / (radius_ * weights_[n - 1]);

    // Thomas algorithm; the matrix is an M-matrix so no pivoting is needed.
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower_[i] / diag_[i - 1];
        diag_[i] -= m * upper_[i - 1];
        rhs_[i] -= m * rhs_[i - 1];
    }
    next_[n - 1] = rhs_[n - 1] / diag_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        next_[i] = (rhs_[i] - upper_[i] * next_[i + 1]) / diag_[i];

    for (std::size_t i = 0; i < n; ++i) {
        if (!(next_[i] >= 0.0 && next_[i] <= c_s_max_))
            throw SaturationError("node " + std::to_string(i) + " concentration " +
                                  io::format_double(next_[i]) + " outside [0, " +
                                  io::format_double(c_s_max_) + "]");
    }
    std::copy(next_.begin(), next_.end(), c.begin());
}

void diffusion_step(std::span<double> c, double D_s, double j_n, double dt, double radius,
                    double c_s_max)
{
    ParticleDiffusion solver(static_cast<int>(c.size()), radius, c_s_max);
    solver.step(c, D_s, j_n, dt);
}

SpmtState initial_state(const CellParameters& p, double soc0, double T0)
{
    if (!(soc0 > 0.0 && soc0 < 1.0))
        throw DomainError("initial_state: soc0 must lie in (0, 1)");
    if (!(T0 > 0.0))
        throw DomainError("initial_state: T0 must be positive");
    const double theta_neg = stoichiometry_for_soc(p.neg, soc0);
    // Lithium removed from the negative electrode relative to full charge lands in the positive.
    const double store_neg = p.neg.volume_fraction() * p.neg.L * p.neg.c_s_max;
    const double store_pos = p.pos.volume_fraction() * p.pos.L * p.pos.c_s_max;
    const double theta_pos =
        p.pos.theta_100 + (p.neg.theta_100 - theta_neg) * store_neg / store_pos *
                              (p.pos.theta_0 > p.pos.theta_100 ? 1.0 : -1.0);
    if (!(theta_pos > 0.0 && theta_pos < 1.0))
        throw DomainError("initial_state: positive stoichiometry outside (0, 1)");

    SpmtState s;
    const auto n = static_cast<std::size_t>(p.solver.N_r);
    s.c_pos.assign(n, theta_pos * p.pos.c_s_max);
    s.c_neg.assign(n, theta_neg * p.neg.c_s_max);
    s.T = T0;
    s.t = 0.0;
    return s;
}

SocPair soc_pair(const SpmtState& state, const ElectrodeParameters& neg)
{
    return {state.c_neg.back() / neg.c_s_max, bulk_concentration(state.c_neg) / neg.c_s_max};
}

double positive_soc(const SpmtState& state, const ElectrodeParameters& pos)
{
    const double theta = bulk_concentration(state.c_pos) / pos.c_s_max;
    return (theta - pos.theta_0) / (pos.theta_100 - pos.theta_0);
}

SpmtOutput terminal_voltage(const SpmtState& state, double current, const CellParameters& p)
{
    const double T = state.T;
    const double css_pos = state.c_pos.back();
    const double css_neg = state.c_neg.back();

    const double k_pos = arrhenius(p.pos.k_ref, p.pos.E_k, p.T_ref, T, p.R_gas);
    const double k_neg = arrhenius(p.neg.k_ref, p.neg.E_k, p.T_ref, T, p.R_gas);
    const double i0_pos =
        exchange_current_density(css_pos, k_pos, p.pos.c_s_max, p.c_e0, p.alpha_a, p.alpha_c);
    const double i0_neg =
        exchange_current_density(css_neg, k_neg, p.neg.c_s_max, p.c_e0, p.alpha_a, p.alpha_c);

    SpmtOutput out;
    out.t = state.t;
    out.I = current;
    out.T = T;
    out.eta_pos = overpotential(molar_flux(current, Electrode::positive, p), i0_pos, T, p.F, p.R_gas);
    out.eta_neg = overpotential(molar_flux(current, Electrode::negative, p), i0_neg, T, p.F, p.R_gas);
    out.V = p.pos.ocv(css_pos / p.pos.c_s_max) - p.neg.ocv(css_neg / p.neg.c_s_max) +
            out.eta_pos - out.eta_neg - p.film_resistance() * current;
    const SocPair soc = soc_pair(state, p.neg);
    out.soc_surf = soc.surf;
    out.soc_bulk = soc.bulk;
    out.q_gen = heat_generation(state, current, out.V, p);
    return out;
}

namespace {

struct HeatTerms
{
    double irreversible; // I (U_bulk - V)
    double entropic;     // I d(U+ - U-)/dT; multiplied by -T
};

HeatTerms heat_terms(const SpmtState& state, double current, double V, const CellParameters& p)
{
    const double th_pos = bulk_concentration(state.c_pos) / p.pos.c_s_max;
    const double th_neg = bulk_concentration(state.c_neg) / p.neg.c_s_max;
    const double ocv_bulk = p.pos.ocv(th_pos) - p.neg.ocv(th_neg);
    const double dudt = p.pos.entropy(th_pos) - p.neg.entropy(th_neg);
    return {current * (ocv_bulk - V), current * dudt};
}

} // namespace

double heat_generation(const SpmtState& state, double current, double V, const CellParameters& p)
{
    const HeatTerms h = heat_terms(state, current, V, p);
    return h.irreversible - state.T * h.entropic;
}

double thermal_step(const SpmtState& state, double current, double V, const CellParameters& p,
                    double T_amb, double dt)
{
    if (!(dt > 0.0))
        throw DomainError("thermal_step: dt must be positive");
    const HeatTerms h = heat_terms(state, current, V, p);
    const double capacity = p.heat_capacity();
    auto rate = [&](double T) {
        return (h.irreversible - T * h.entropic - p.h_cell * (T - T_amb)) / capacity;
    };
    const double first = std::abs(rate(state.T) * dt);
    const int substeps = std::max(1, static_cast<int>(std::ceil(first / p.solver.max_dT_per_step)));
    const double sub = dt / substeps;
    double T = state.T;
    for (int i = 0; i < substeps; ++i)
        T += sub * rate(T);
    if (!(T > 0.0))
        throw DomainError("thermal_step: temperature became non-positive");
    return T;
}

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::completed:
        return "completed";
    case Termination::cutoff_low:
        return "cutoff_low";
    case Termination::cutoff_high:
        return "cutoff_high";
    case Termination::saturation:
        return "saturation";
    }
    return "unknown";
}

void SimulationResult::throw_if_saturated() const
{
    if (termination == Termination::saturation)
        throw SaturationError(detail, stop_time);
}

SimulationResult simulate(const CellParameters& p, double soc0, const CurrentProfile& profile,
                          double T0, double T_amb, double t_end)
{
    p.validate();
    if (!(T_amb > 0.0))
        throw DomainError("simulate: T_amb must be positive");
    if (!(t_end >= 0.0))
        throw DomainError("simulate: t_end must be non-negative");

    SimulationResult result;
    SpmtState state = initial_state(p, soc0, T0);
    ParticleDiffusion pos(p.solver.N_r, p.pos.R_s, p.pos.c_s_max);
    ParticleDiffusion neg(p.solver.N_r, p.neg.R_s, p.neg.c_s_max);
    const double dt = p.solver.dt;
    const auto steps = static_cast<long long>(std::floor(t_end / dt + 1e-9));

    auto stop = [&](Termination why, std::string detail) {
        result.termination = why;
        result.stop_time = state.t;
        result.detail = std::move(detail);
    };
    // Returns false when the sample ends the run.
    auto record = [&](const SpmtOutput& out) {
        if (out.V < p.V_min) {
            stop(Termination::cutoff_low, "V=" + io::format_double(out.V) + " below V_min");
            return false;
        }
        if (out.V > p.V_max) {
            stop(Termination::cutoff_high, "V=" + io::format_double(out.V) + " above V_max");
            return false;
        }
        result.trace.push_back(out);
        return true;
    };

    try {
        SpmtOutput out = terminal_voltage(state, profile.at(0.0), p);
        bool running = record(out);
        for (long long k = 0; running && k < steps; ++k) {
            const double current = profile.at(state.t);
            const double T_next = thermal_step(state, current, out.V, p, T_amb, dt);
            // Transport coefficients use the start-of-step temperature.
            const double D_pos = arrhenius(p.pos.D_s_ref, p.pos.E_D, p.T_ref, state.T, p.R_gas);
            const double D_neg = arrhenius(p.neg.D_s_ref, p.neg.E_D, p.T_ref, state.T, p.R_gas);
            pos.step(state.c_pos, D_pos, molar_flux(current, Electrode::positive, p), dt);
            neg.step(state.c_neg, D_neg, molar_flux(current, Electrode::negative, p), dt);
            state.T = T_next;
            state.t = static_cast<double>(k + 1) * dt;
            out = terminal_voltage(state, profile.at(state.t), p);
            running = record(out);
        }
    } catch (const SaturationError& e) {
        stop(Termination::saturation,
             "saturation at t=" + io::format_double(state.t) + " s: " + e.what());
    }
    if (result.termination == Termination::completed)
        result.stop_time = state.t;
    result.final_state = std::move(state);
    return result;
}

std::string trace_csv(const SimulationResult& result, std::span<const double> v_hybrid)
{
    if (!v_hybrid.empty() && v_hybrid.size() != result.trace.size())
        throw DimensionError("trace_csv: V_hybrid length differs from the trace");
    std::string out = kTraceHeader;
    if (!v_hybrid.empty())
        out += ",V_hybrid";
    out += '\n';
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const SpmtOutput& s = result.trace[i];
        for (double v : {s.t, s.I, s.V, s.T, s.soc_surf, s.soc_bulk, s.eta_pos, s.eta_neg}) {
            out += io::format_double(v);
            out += ',';
        }
        out += io::format_double(s.q_gen);
        if (!v_hybrid.empty()) {
            out += ',';
            out += io::format_double(v_hybrid[i]);
        }
        out += '\n';
    }
    out += "# termination=" + to_string(result.termination) +
           " t_stop=" + io::format_double(result.stop_time);
    if (!result.detail.empty())
        out += " detail=\"" + result.detail + "\"";
    out += '\n';
    return out;
}

} // namespace spmtnet::spmt
