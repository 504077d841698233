#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spmtnet/params.hpp"
#include "spmtnet/profile.hpp"
#include "spmtnet/spmt.hpp"

/// Synthetic ground truth: an SPMT run (optionally with perturbed parameters)
/// minus a first-order electrolyte-polarization lag that grows superlinearly
/// with current. Stands in for a full porous-electrode reference model.
namespace spmtnet::truth {

struct TruthParameters
{
    CellParameters base;
    double p1 = 4.8e-3;  // V/A
    double p2 = 2.3e-4;  // V/A^2
    double p3 = 2.4e-3;  // V/A, scaled by (1 - soc_bulk)
    double tau_e = 30.0; // s

    void validate() const;
};

/// Which (profile, soc0) pairs make up each split.
struct SplitSpec
{
    std::vector<ProfileSpec> train_profiles;
    std::vector<double> train_soc0;
    std::vector<ProfileSpec> test_profiles;
    std::vector<double> test_soc0;
    double T_amb = 298.15;

    /// Constant currents at 0.1/0.2/1/2/4/6/8/10 C plus two drive cycles at
    /// soc0 in {0.27, 0.52, 0.67, 0.74} for training; 0.5/1/3/5/7/10 C plus
    /// two differently seeded drive cycles at soc0 in {0.46, 0.58, 0.70} for test.
    static SplitSpec standard(std::uint64_t seed, double drive_cycle_t_end = 1200.0);
};

struct TruthConfig
{
    TruthParameters truth;
    SplitSpec split;
    std::uint64_t seed = 2021;
    double drive_cycle_t_end = 1200.0;
    nlohmann::json source; // canonical JSON, hashed into provenance
};

/// Reads p1/p2/p3/tau_e, optional multiplicative perturbations of the base
/// parameters, and the seed / drive-cycle length. The split is rebuilt from the
/// seed, so `seed_override` changes every drive cycle consistently.
TruthConfig truth_config_from_json(const nlohmann::json& j, const CellParameters& spmt_params,
                                   std::optional<std::uint64_t> seed_override = {});
TruthConfig load_truth_config(const std::filesystem::path& path, const CellParameters& spmt_params,
                              std::optional<std::uint64_t> seed_override = {});
std::string truth_hash(const TruthConfig& cfg);

/// V_true(t) = V*(t) - dV(t), tau_e dV/dt = -dV + p1 I + p2 I|I| + p3 I (1 - soc_bulk),
/// integrated exactly under the zero-order hold the simulator uses.
std::vector<double> truth_voltage(std::span<const spmt::SpmtOutput> trace,
                                  const CurrentProfile& profile, const TruthParameters& truth);

struct Record
{
    double t = 0.0;
    double I = 0.0;
    double V_true = 0.0;
    double V_spmt = 0.0;
    double T_spmt = 0.0;
    double soc0 = 0.0;
    double soc_bulk = 0.0;
    double soc_surf = 0.0;
};

inline constexpr const char* kDatasetHeader = "t,I,V_true,V_spmt,T_spmt,soc0,soc_bulk,soc_surf";

struct DatasetInfo
{
    std::string split; // "train" or "test"
    ProfileSpec profile;
    double soc0 = 0.0;
    double T_amb = 298.15;
    std::string truth_termination;
    std::string spmt_termination;

    std::string file_name() const;
};

struct Dataset
{
    DatasetInfo info;
    std::vector<Record> records;
};

struct DatasetBundle
{
    std::vector<Dataset> train;
    std::vector<Dataset> test;
};

/// Simulates one (profile, soc0) pair with the truth model and the plain SPMT,
/// keeping rows up to the earlier cutoff of the two.
Dataset build_dataset(const TruthParameters& truth, const CellParameters& spmt_params,
                      const ProfileSpec& profile, double soc0, double T_amb,
                      const std::string& split);

DatasetBundle build_datasets(const TruthParameters& truth, const CellParameters& spmt_params,
                             const SplitSpec& split);

std::string dataset_csv(const Dataset& d);
std::vector<Record> parse_dataset_csv(const std::string& text);

nlohmann::json profile_to_json(const ProfileSpec& p);
ProfileSpec profile_from_json(const nlohmann::json& j);

/// Writes <dir>/<split>/<file>.csv for every dataset plus <dir>/manifest.json.
/// Returns the manifest SHA-256.
std::string write_bundle(const std::filesystem::path& dir, const DatasetBundle& bundle,
                         const std::string& params_hash, const std::string& truth_hash,
                         std::uint64_t seed);

struct Manifest
{
    nlohmann::json doc;
    std::vector<Dataset> train;
    std::vector<Dataset> test;
    std::string sha256;
};

/// Loads every dataset listed in <dir>/manifest.json and checks file hashes.
Manifest load_bundle(const std::filesystem::path& dir);

} // namespace spmtnet::truth
