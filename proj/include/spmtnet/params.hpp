#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "spmtnet/curve.hpp"

namespace spmtnet {

/// Transport, kinetic and thermodynamic description of one electrode.
struct ElectrodeParameters
{
    double D_s_ref = 0.0;   // solid diffusion coefficient at T_ref, m^2/s
    double k_ref = 0.0;     // reaction rate constant at T_ref, A/m^2 per (mol/m^3)^1.5
    double R_s = 0.0;       // particle radius, m
    double a_s = 0.0;       // specific interfacial area, 1/m
    double L = 0.0;         // electrode thickness, m
    double c_s_max = 0.0;   // maximum solid concentration, mol/m^3
    double R_f = 0.0;       // film resistance (area-lumped, see conventions)
    double E_D = 0.0;       // activation energy of D_s, J/mol
    double E_k = 0.0;       // activation energy of k, J/mol
    double theta_0 = 0.0;   // stoichiometry at 0 % SoC
    double theta_100 = 0.0; // stoichiometry at 100 % SoC
    TabulatedCurve ocv;     // U(theta), V
    TabulatedCurve entropy; // dU/dT(theta), V/K

    /// Active-material volume fraction implied by a_s = 3 eps / R_s.
    double volume_fraction() const { return a_s * R_s / 3.0; }
};

struct SolverSettings
{
    int N_r = 20;
    double dt = 1.0;
    double max_dT_per_step = 0.5;
};

struct CellParameters
{
    ElectrodeParameters pos;
    ElectrodeParameters neg;
    double A = 0.0;       // electrode surface area, m^2
    double F = 96487.0;   // C/mol
    double R_gas = 8.314; // J/mol/K
    double c_e0 = 0.0;    // electrolyte concentration, mol/m^3
    double alpha_a = 0.5;
    double alpha_c = 0.5;
    double rho_avg = 0.0; // lumped: rho_avg * c_p is the cell heat capacity (J/K)
    double c_p = 0.0;
    double h_cell = 0.0;  // lumped convective conductance, W/K
    double T_ref = 298.15;
    double V_min = 3.1;
    double V_max = 4.1;
    SolverSettings solver;

    /// Throws FormatError on the first violated invariant.
    void validate() const;

    /// Charge exchanged by the negative electrode between 0 % and 100 % SoC, Ah.
    double capacity_Ah() const;
    double heat_capacity() const { return rho_avg * c_p; }
    /// Series film resistance R_f+/(a_s+ L+) + R_f-/(a_s- L-).
    double film_resistance() const;
};

CellParameters parameters_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CellParameters& p);
CellParameters load_parameters(const std::filesystem::path& path);

/// SHA-256 of the canonical JSON serialization; stable across formatting changes
/// of the source file.
std::string parameters_hash(const CellParameters& p);

} // namespace spmtnet
