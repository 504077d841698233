#include "spmtnet/params.hpp"

#include <cmath>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet {

namespace {

using nlohmann::json;

double number(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
        throw FormatError(where + ": missing numeric field '" + key + "'");
    return it->get<double>();
}

double number_or(const json& obj, const char* key, double fallback)
{
    auto it = obj.find(key);
    return (it == obj.end()) ? fallback : it->get<double>();
}

TabulatedCurve curve(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array())
        throw FormatError(where + ": missing table '" + key + "'");
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : *it) {
        if (!row.is_array() || row.size() != 2)
            throw FormatError(where + "." + key + ": rows must be [theta, value] pairs");
        pts.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    try {
        return TabulatedCurve::from_pairs(pts);
    } catch (const FormatError& e) {
        throw FormatError(where + "." + key + ": " + e.what());
    }
}

json curve_json(const TabulatedCurve& c)
{
    json arr = json::array();
    for (std::size_t i = 0; i < c.x().size(); ++i)
        arr.push_back({c.x()[i], c.y()[i]});
    return arr;
}

ElectrodeParameters electrode_from_json(const json& j, const std::string& where)
{
    if (!j.is_object())
        throw FormatError("missing electrode block '" + where + "'");
    ElectrodeParameters e;
    e.D_s_ref = number(j, "D_s_ref", where);
    e.k_ref = number(j, "k_ref", where);
    e.R_s = number(j, "R_s", where);
    e.a_s = number(j, "a_s", where);
    e.L = number(j, "L", where);
    e.c_s_max = number(j, "c_s_max", where);
    e.R_f = number(j, "R_f", where);
    e.E_D = number(j, "E_D", where);
    e.E_k = number(j, "E_k", where);
    e.theta_0 = number(j, "theta_0", where);
    e.theta_100 = number(j, "theta_100", where);
    e.ocv = curve(j, "ocv", where);
    e.entropy = curve(j, "entropy", where);
    return e;
}

json electrode_json(const ElectrodeParameters& e)
{
    return {
        {"D_s_ref", e.D_s_ref}, {"k_ref", e.k_ref},         {"R_s", e.R_s},
        {"a_s", e.a_s},         {"L", e.L},                 {"c_s_max", e.c_s_max},
        {"R_f", e.R_f},         {"E_D", e.E_D},             {"E_k", e.E_k},
        {"theta_0", e.theta_0}, {"theta_100", e.theta_100}, {"ocv", curve_json(e.ocv)},
        {"entropy", curve_json(e.entropy)},
    };
}

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw FormatError("invalid parameters: " + msg);
}

void validate_electrode(const ElectrodeParameters& e, const std::string& name)
{
    auto positive = [&](double v, const char* field) {
        require(std::isfinite(v) && v > 0.0, name + "." + field + " must be positive");
    };
    positive(e.D_s_ref, "D_s_ref");
    positive(e.k_ref, "k_ref");
    positive(e.R_s, "R_s");
    positive(e.a_s, "a_s");
    positive(e.L, "L");
    positive(e.c_s_max, "c_s_max");
    require(e.R_f >= 0.0, name + ".R_f must be non-negative");
    require(e.E_D >= 0.0 && e.E_k >= 0.0, name + " activation energies must be non-negative");
    for (double th : {e.theta_0, e.theta_100})
        require(th > 0.0 && th < 1.0, name + " stoichiometry endpoints must lie in (0, 1)");
    require(e.theta_0 != e.theta_100, name + " stoichiometry endpoints must differ");
    require(!e.ocv.empty() && !e.entropy.empty(), name + " OCV and entropy tables are required");
}

} // namespace

void CellParameters::validate() const
{
    validate_electrode(pos, "positive");
    validate_electrode(neg, "negative");
    for (auto [v, name] : {std::pair{A, "A"}, {F, "F"}, {R_gas, "R_gas"}, {c_e0, "c_e0"},
                           {rho_avg, "rho_avg"}, {c_p, "c_p"}, {T_ref, "T_ref"}})
        require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive");
    require(h_cell >= 0.0, "h_cell must be non-negative");
    // The asinh closed form for the overpotential only holds for symmetric transfer.
    require(alpha_a == 0.5 && alpha_c == 0.5,
            "transfer coefficients must be alpha_a = alpha_c = 0.5");
    require(V_min < V_max, "V_min must be below V_max");
    require(solver.N_r >= 3, "solver.N_r must be at least 3");
    require(solver.dt > 0.0, "solver.dt must be positive");
    require(solver.max_dT_per_step > 0.0, "solver.max_dT_per_step must be positive");
}

double CellParameters::capacity_Ah() const
{
    const double stored = neg.volume_fraction() * neg.L * neg.c_s_max;
    return F * A * stored * std::abs(neg.theta_100 - neg.theta_0) / 3600.0;
}

double CellParameters::film_resistance() const
{
    return pos.R_f / (pos.a_s * pos.L) + neg.R_f / (neg.a_s * neg.L);
}

CellParameters parameters_from_json(const json& j)
{
    CellParameters p;
    if (auto c = j.find("constants"); c != j.end()) {
        p.F = number_or(*c, "F", p.F);
        p.R_gas = number_or(*c, "R_gas", p.R_gas);
    }
    auto cell = j.find("cell");
    if (cell == j.end())
        throw FormatError("parameter file: missing 'cell' block");
    p.A = number(*cell, "A", "cell");
    p.c_e0 = number(*cell, "c_e0", "cell");
    p.alpha_a = number_or(*cell, "alpha_a", 0.5);
    p.alpha_c = number_or(*cell, "alpha_c", 0.5);
    p.rho_avg = number(*cell, "rho_avg", "cell");
    p.c_p = number(*cell, "c_p", "cell");
    p.h_cell = number(*cell, "h_cell", "cell");
    p.T_ref = number(*cell, "T_ref", "cell");
    p.V_min = number_or(*cell, "V_min", 3.1);
    p.V_max = number_or(*cell, "V_max", 4.1);
    p.pos = electrode_from_json(j.value("positive", json{}), "positive");
    p.neg = electrode_from_json(j.value("negative", json{}), "negative");
    if (auto s = j.find("solver"); s != j.end()) {
        p.solver.N_r = s->value("N_r", p.solver.N_r);
        p.solver.dt = s->value("dt", p.solver.dt);
        p.solver.max_dT_per_step = s->value("max_dT_per_step", p.solver.max_dT_per_step);
    }
    p.validate();
    return p;
}

json to_json(const CellParameters& p)
{
    return {
        {"constants", {{"F", p.F}, {"R_gas", p.R_gas}}},
        {"cell",
         {{"A", p.A},
          {"c_e0", p.c_e0},
          {"alpha_a", p.alpha_a},
          {"alpha_c", p.alpha_c},
          {"rho_avg", p.rho_avg},
          {"c_p", p.c_p},
          {"h_cell", p.h_cell},
          {"T_ref", p.T_ref},
          {"V_min", p.V_min},
          {"V_max", p.V_max}}},
        {"positive", electrode_json(p.pos)},
        {"negative", electrode_json(p.neg)},
        {"solver",
         {{"N_r", p.solver.N_r},
          {"dt", p.solver.dt},
          {"max_dT_per_step", p.solver.max_dT_per_step}}},
    };
}

CellParameters load_parameters(const std::filesystem::path& path)
{
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return parameters_from_json(j);
}

std::string parameters_hash(const CellParameters& p)
{
    return io::sha256_hex(to_json(p).dump());
}

} // namespace spmtnet
