#include "spmtnet/truth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet::truth {

using nlohmann::json;

void TruthParameters::validate() const
{
    base.validate();
    if (!(tau_e > 0.0))
        throw FormatError("truth: tau_e must be positive");
    for (double v : {p1, p2, p3})
        if (!std::isfinite(v))
            throw FormatError("truth: polarization coefficients must be finite");
}

SplitSpec SplitSpec::standard(std::uint64_t seed, double drive_cycle_t_end)
{
    auto cc = [](double rate) {
        ProfileSpec p;
        p.kind = ProfileKind::constant;
        p.c_rate = rate;
        p.label = constant_label(rate);
        // Long enough to exhaust a full cell; the voltage cutoff ends every run sooner.
        p.t_end = std::ceil(3600.0 / rate * 1.05);
        return p;
    };
    auto drive = [&](DriveFamily f, std::uint64_t s, std::string label) {
        ProfileSpec p;
        p.kind = ProfileKind::drive_cycle;
        p.family = f;
        p.seed = s;
        p.t_end = drive_cycle_t_end;
        p.label = std::move(label);
        return p;
    };

    SplitSpec s;
    for (double r : {0.1, 0.2, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0})
        s.train_profiles.push_back(cc(r));
    s.train_profiles.push_back(drive(DriveFamily::udds, seed + 1, "UDDS-A"));
    s.train_profiles.push_back(drive(DriveFamily::us06, seed + 2, "US06-A"));
    s.train_soc0 = {0.27, 0.52, 0.67, 0.74};

    for (double r : {0.5, 1.0, 3.0, 5.0, 7.0, 10.0})
        s.test_profiles.push_back(cc(r));
    s.test_profiles.push_back(drive(DriveFamily::udds, seed + 11, "UDDS-B"));
    s.test_profiles.push_back(drive(DriveFamily::us06, seed + 12, "US06-B"));
    s.test_soc0 = {0.46, 0.58, 0.70};
    return s;
}

namespace {

void apply_perturbation(CellParameters& p, const json& perturb)
{
    for (const auto& [key, value] : perturb.items()) {
        const double factor = value.get<double>();
        const auto dot = key.find('.');
        if (dot == std::string::npos)
            throw FormatError("truth: perturbation key '" + key + "' must be electrode.field");
        const std::string side = key.substr(0, dot);
        const std::string field = key.substr(dot + 1);
        ElectrodeParameters* e = nullptr;
        if (side == "positive")
            e = &p.pos;
        else if (side == "negative")
            e = &p.neg;
        else
            throw FormatError("truth: unknown electrode '" + side + "'");
        if (field == "D_s_ref")
            e->D_s_ref *= factor;
        else if (field == "k_ref")
            e->k_ref *= factor;
        else if (field == "R_f")
            e->R_f *= factor;
        else if (field == "R_s")
            e->R_s *= factor;
        else
            throw FormatError("truth: field '" + field + "' cannot be perturbed");
    }
}

} // namespace

TruthConfig truth_config_from_json(const json& j, const CellParameters& spmt_params,
                                   std::optional<std::uint64_t> seed_override)
{
    TruthConfig cfg;
    cfg.truth.base = spmt_params;
    const json& pol = j.contains("polarization") ? j.at("polarization") : j;
    cfg.truth.p1 = pol.value("p1", cfg.truth.p1);
    cfg.truth.p2 = pol.value("p2", cfg.truth.p2);
    cfg.truth.p3 = pol.value("p3", cfg.truth.p3);
    cfg.truth.tau_e = pol.value("tau_e", cfg.truth.tau_e);
    json perturb = json::object();
    if (auto it = j.find("perturbation"); it != j.end() && it->value("enabled", false))
        perturb = it->value("factors", json::object());
    apply_perturbation(cfg.truth.base, perturb);
    cfg.truth.validate();

    cfg.seed = seed_override ? *seed_override : j.value("seed", cfg.seed);
    cfg.drive_cycle_t_end = j.value("drive_cycle_t_end", cfg.drive_cycle_t_end);
    cfg.split = SplitSpec::standard(cfg.seed, cfg.drive_cycle_t_end);
    cfg.split.T_amb = j.value("T_amb", cfg.split.T_amb);

    cfg.source = {
        {"polarization",
         {{"p1", cfg.truth.p1}, {"p2", cfg.truth.p2}, {"p3", cfg.truth.p3}, {"tau_e", cfg.truth.tau_e}}},
        {"perturbation", perturb},
        {"seed", cfg.seed},
        {"drive_cycle_t_end", cfg.drive_cycle_t_end},
        {"T_amb", cfg.split.T_amb},
    };
    return cfg;
}

TruthConfig load_truth_config(const std::filesystem::path& path, const CellParameters& spmt_params,
                              std::optional<std::uint64_t> seed_override)
{
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return truth_config_from_json(j, spmt_params, seed_override);
}

std::string truth_hash(const TruthConfig& cfg)
{
    return io::sha256_hex(cfg.source.dump());
}

std::vector<double> truth_voltage(std::span<const spmt::SpmtOutput> trace,
                                  const CurrentProfile& profile, const TruthParameters& truth)
{
    std::vector<double> v(trace.size());
    double lag = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const spmt::SpmtOutput& s = trace[k];
        if (s.I != profile.at(s.t))
            throw DimensionError("truth_voltage: trace and profile are not aligned at t=" +
                                 io::format_double(s.t));
        v[k] = s.V - lag;
        if (k + 1 < trace.size()) {
            const double dt = trace[k + 1].t - s.t;
            const double decay = std::exp(-dt / truth.tau_e);
            const double forcing =
                truth.p1 * s.I + truth.p2 * s.I * std::abs(s.I) + truth.p3 * s.I * (1.0 - s.soc_bulk);
            lag = decay * lag + (1.0 - decay) * forcing;
        }
    }
    return v;
}

std::string DatasetInfo::file_name() const
{
    return profile.label + "_soc" + io::format_double(soc0) + ".csv";
}

Dataset build_dataset(const TruthParameters& truth, const CellParameters& spmt_params,
                      const ProfileSpec& spec, double soc0, double T_amb, const std::string& split)
{
    const std::string where = spec.label + " soc0=" + io::format_double(soc0);
    const CurrentProfile profile = make_profile(spec, spmt_params.capacity_Ah());

    spmt::SimulationResult star;
    spmt::SimulationResult plain;
    std::vector<double> v_true;
    try {
        star = spmt::simulate(truth.base, soc0, profile, T_amb, T_amb, profile.duration());
        star.throw_if_saturated();
        v_true = truth_voltage(star.trace, profile, truth);
        plain = spmt::simulate(spmt_params, soc0, profile, T_amb, T_amb, profile.duration());
        plain.throw_if_saturated();
    } catch (const Error& e) {
        throw Error("dataset " + where + ": " + e.what());
    }

    std::size_t n = std::min(star.trace.size(), plain.trace.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (v_true[k] < spmt_params.V_min || v_true[k] > spmt_params.V_max) {
            n = k;
            break;
        }
    }

    Dataset d;
    d.info.split = split;
    d.info.profile = spec;
    d.info.soc0 = soc0;
    d.info.T_amb = T_amb;
    d.info.truth_termination = spmt::to_string(star.termination);
    d.info.spmt_termination = spmt::to_string(plain.termination);
    d.records.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const spmt::SpmtOutput& s = plain.trace[k];
        d.records.push_back({s.t, s.I, v_true[k], s.V, s.T, soc0, s.soc_bulk, s.soc_surf});
    }
    return d;
}

DatasetBundle build_datasets(const TruthParameters& truth, const CellParameters& spmt_params,
                             const SplitSpec& split)
{
    truth.validate();
    spmt_params.validate();
    DatasetBundle out;
    for (const auto& prof : split.train_profiles)
        for (double soc0 : split.train_soc0)
            out.train.push_back(build_dataset(truth, spmt_params, prof, soc0, split.T_amb, "train"));
    for (const auto& prof : split.test_profiles)
        for (double soc0 : split.test_soc0)
            out.test.push_back(build_dataset(truth, spmt_params, prof, soc0, split.T_amb, "test"));
    return out;
}

std::string dataset_csv(const Dataset& d)
{
    std::string out = kDatasetHeader;
    out += '\n';
    for (const Record& r : d.records) {
        const double row[] = {r.t, r.I, r.V_true, r.V_spmt, r.T_spmt, r.soc0, r.soc_bulk, r.soc_surf};
        for (std::size_t i = 0; i < std::size(row); ++i) {
            if (i)
                out += ',';
            out += io::format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<Record> parse_dataset_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("dataset: empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kDatasetHeader)
        throw FormatError("dataset: unexpected header '" + line + "'");
    std::vector<Record> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        auto f = io::split(line, ',');
        if (f.size() != 8)
            throw FormatError("dataset: expected 8 columns, got " + std::to_string(f.size()));
        rows.push_back({io::parse_double(f[0]), io::parse_double(f[1]), io::parse_double(f[2]),
                        io::parse_double(f[3]), io::parse_double(f[4]), io::parse_double(f[5]),
                        io::parse_double(f[6]), io::parse_double(f[7])});
    }
    return rows;
}

json profile_to_json(const ProfileSpec& p)
{
    json j = {{"label", p.label}, {"t_end", p.t_end}};
    if (p.kind == ProfileKind::constant) {
        j["kind"] = "constant";
        j["c_rate"] = p.c_rate;
    } else {
        j["kind"] = "drive-cycle";
        j["family"] = to_string(p.family);
        j["seed"] = p.seed;
    }
    return j;
}

ProfileSpec profile_from_json(const json& j)
{
    ProfileSpec p;
    p.label = j.at("label").get<std::string>();
    p.t_end = j.at("t_end").get<double>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        p.kind = ProfileKind::constant;
        p.c_rate = j.at("c_rate").get<double>();
    } else if (kind == "drive-cycle") {
        p.kind = ProfileKind::drive_cycle;
        p.family = drive_family_from_string(j.at("family").get<std::string>());
        p.seed = j.at("seed").get<std::uint64_t>();
    } else {
        throw FormatError("unknown profile kind '" + kind + "'");
    }
    return p;
}

std::string write_bundle(const std::filesystem::path& dir, const DatasetBundle& bundle,
                         const std::string& params_hash, const std::string& truth_hash,
                         std::uint64_t seed)
{
    json entries = json::array();
    auto emit = [&](const std::vector<Dataset>& sets) {
        for (const Dataset& d : sets) {
            const std::string rel = d.info.split + "/" + d.info.file_name();
            const std::string csv = dataset_csv(d);
            io::write_file_atomic(dir / rel, csv);
            entries.push_back({
                {"split", d.info.split},
                {"profile", profile_to_json(d.info.profile)},
                {"soc0", d.info.soc0},
                {"T_amb", d.info.T_amb},
                {"file", rel},
                {"rows", d.records.size()},
                {"sha256", io::sha256_hex(csv)},
                {"truth_termination", d.info.truth_termination},
                {"spmt_termination", d.info.spmt_termination},
            });
        }
    };
    emit(bundle.train);
    emit(bundle.test);
    const json manifest = {
        {"format", "spmtnet-datasets/1"},
        {"params_sha256", params_hash},
        {"truth_sha256", truth_hash},
        {"seed", seed},
        {"entries", entries},
    };
    const std::string text = manifest.dump(2) + "\n";
    io::write_file_atomic(dir / "manifest.json", text);
    return io::sha256_hex(text);
}

Manifest load_bundle(const std::filesystem::path& dir)
{
    Manifest m;
    const std::string text = io::read_file(dir / "manifest.json");
    m.sha256 = io::sha256_hex(text);
    try {
        m.doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("manifest: " + std::string(e.what()));
    }
    for (const auto& e : m.doc.at("entries")) {
        Dataset d;
        d.info.split = e.at("split").get<std::string>();
        d.info.profile = profile_from_json(e.at("profile"));
        d.info.soc0 = e.at("soc0").get<double>();
        d.info.T_amb = e.value("T_amb", 298.15);
        d.info.truth_termination = e.value("truth_termination", "");
        d.info.spmt_termination = e.value("spmt_termination", "");
        const auto file = dir / e.at("file").get<std::string>();
        const std::string csv = io::read_file(file);
        if (io::sha256_hex(csv) != e.at("sha256").get<std::string>())
            throw FormatError("manifest: hash mismatch for " + file.string());
        d.records = parse_dataset_csv(csv);
        (d.info.split == "train" ? m.train : m.test).push_back(std::move(d));
    }
    return m;
}

} // namespace spmtnet::truth
