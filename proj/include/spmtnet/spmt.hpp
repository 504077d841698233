#pragma once

#include <span>
#include <string>
#include <vector>

#include "spmtnet/params.hpp"
#include "spmtnet/profile.hpp"

/// Single particle model with lumped thermal dynamics.
///
/// Each electrode is one spherical particle. Solid diffusion is discretized
/// with a vertex-centred finite-volume method of lines (node 0 at the centre,
/// node N-1 on the surface) and advanced with Crank-Nicolson; the lumped
/// temperature is advanced with explicit Euler. Current is discharge-positive.
namespace spmtnet::spmt {

enum class Electrode { positive, negative };

/// psi_ref * exp[(E / R) (1/T_ref - 1/T)].
double arrhenius(double psi_ref, double activation_energy, double T_ref, double T, double R_gas);

/// Surface molar flux j_n = -/+ I / (a_s F A L); positive means lithium leaves the particle.
double molar_flux(double current, Electrode electrode, const CellParameters& p);

/// i0 = k ce^aa css^ac (cmax - css)^aa. Throws SaturationError unless 0 < css < cmax.
double exchange_current_density(double c_ss, double k, double c_s_max, double c_e0,
                                double alpha_a, double alpha_c);

/// Inverted symmetric Butler-Volmer: (2RT/F) asinh(F j_n / (2 i0)).
double overpotential(double j_n, double i0, double T, double F, double R_gas);

/// Normalized control-volume weights of an n-node sphere grid; they sum to 1 and
/// define the bulk average used throughout (and conserved by the scheme).
const std::vector<double>& shell_weights(int nodes);

double bulk_concentration(std::span<const double> c);

/// Crank-Nicolson stepper for one particle, reusable across steps.
class ParticleDiffusion
{
public:
    ParticleDiffusion(int nodes, double radius, double c_s_max);

    /// Advances c by dt under zero centre flux and surface flux j_n (held constant).
    /// Leaves c untouched and throws SaturationError if any node would leave [0, c_s_max].
    void step(std::span<double> c, double D_s, double j_n, double dt);

    int nodes() const { return static_cast<int>(weights_.size()); }

private:
    double radius_;
    double c_s_max_;
    double h_;                     // node spacing / radius
    std::vector<double> weights_;  // 3 * control volume / R^3
    std::vector<double> face_area_; // (r_{i+1/2}/R)^2, i = 0..n-2
    std::vector<double> lower_, diag_, upper_, rhs_, next_;
};

/// Convenience wrapper around ParticleDiffusion for a single step.
void diffusion_step(std::span<double> c, double D_s, double j_n, double dt, double radius,
                    double c_s_max);

struct SpmtState
{
    std::vector<double> c_pos; // mol/m^3, centre to surface
    std::vector<double> c_neg;
    double T = 298.15;         // K
    double t = 0.0;            // s
};

/// Uniform particles at the stoichiometries implied by soc0 (lithium-balanced).
SpmtState initial_state(const CellParameters& p, double soc0, double T0);

struct SocPair
{
    double surf = 0.0;
    double bulk = 0.0;
};

/// Anodic (negative-electrode) surface and bulk SoC.
SocPair soc_pair(const SpmtState& state, const ElectrodeParameters& neg);

/// Positive-electrode SoC mapped through its stoichiometry window. Diagnostic only.
double positive_soc(const SpmtState& state, const ElectrodeParameters& pos);

struct SpmtOutput
{
    double t = 0.0;
    double I = 0.0;
    double V = 0.0;
    double T = 0.0;
    double soc_surf = 0.0;
    double soc_bulk = 0.0;
    double eta_pos = 0.0;
    double eta_neg = 0.0;
    double q_gen = 0.0; // W
};

SpmtOutput terminal_voltage(const SpmtState& state, double current, const CellParameters& p);

/// Ohmic plus entropic heat, W, evaluated at the bulk stoichiometries.
double heat_generation(const SpmtState& state, double current, double V, const CellParameters& p);

/// Explicit Euler on the lumped energy balance, substepped so no substep moves T
/// by more than solver.max_dT_per_step.
double thermal_step(const SpmtState& state, double current, double V, const CellParameters& p,
                    double T_amb, double dt);

enum class Termination { completed, cutoff_low, cutoff_high, saturation };
std::string to_string(Termination t);

struct SimulationResult
{
    std::vector<SpmtOutput> trace;
    Termination termination = Termination::completed;
    double stop_time = 0.0;
    std::string detail;
    SpmtState final_state;

    bool stopped_early() const { return termination != Termination::completed; }
    /// Rethrows a recorded saturation as SaturationError.
    void throw_if_saturated() const;
};

/// Runs the full model from uniform particles. Samples that fall outside
/// [V_min, V_max] end the run and are not recorded; a saturation ends the run
/// with the partial trace and the failing time in `detail`.
SimulationResult simulate(const CellParameters& p, double soc0, const CurrentProfile& profile,
                          double T0, double T_amb, double t_end);

inline constexpr const char* kTraceHeader = "t,I,V,T,soc_surf,soc_bulk,eta_pos,eta_neg,q_gen";

/// Trace CSV with a trailing "# termination=..." metadata line. When
/// `v_hybrid` is non-empty a V_hybrid column is appended.
std::string trace_csv(const SimulationResult& result, std::span<const double> v_hybrid = {});

} // namespace spmtnet::spmt
