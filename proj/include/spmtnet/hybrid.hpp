#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spmtnet/fnn.hpp"
#include "spmtnet/params.hpp"
#include "spmtnet/profile.hpp"
#include "spmtnet/spmt.hpp"
#include "spmtnet/truth.hpp"

/// Hybrid physics/ML voltage models. The SPMT runs open loop and its state
/// (bulk and surface SoC of the negative electrode) is fed, together with
/// current, temperature and initial SoC, into a feedforward network.
///
///   hybrid-1 (residual): V = V_spmt + g(x)
///   hybrid-2 (cascade):  V = g(x)
namespace spmtnet::hybrid {

enum class Wiring { residual, cascade };

std::string to_string(Wiring w);
Wiring wiring_from_string(const std::string& s);

/// `no_state` drops soc_bulk and soc_surf; it exists for ablation studies.
enum class FeatureSet { full, no_state };

std::string to_string(FeatureSet f);
FeatureSet feature_set_from_string(const std::string& s);
int feature_count(FeatureSet f);
std::vector<std::string> feature_names(FeatureSet f);

struct FeatureVector
{
    double I = 0.0;
    double T = 0.0;
    double soc0 = 0.0;
    double soc_bulk = 0.0;
    double soc_surf = 0.0;
};

struct TrainingTable
{
    Eigen::MatrixXd X; // one row per sample
    Eigen::VectorXd y;
};

/// One row per dataset record; target is V_true - V_spmt (residual) or V_true (cascade).
TrainingTable make_training_table(const truth::Dataset& dataset, Wiring wiring,
                                  FeatureSet features = FeatureSet::full);

struct HybridModel
{
    Wiring wiring = Wiring::residual;
    FeatureSet features = FeatureSet::full;
    CellParameters spmt_params;
    fnn::FnnModel fnn;
    nlohmann::json provenance = nlohmann::json::object();
};

struct Prediction
{
    spmt::SimulationResult spmt;
    std::vector<double> v_hybrid; // aligned with spmt.trace
    bool partial = false;         // SPMT stopped before the profile ended
};

/// Runs the SPMT from soc0/T0 over the whole profile and maps each sample through
/// the network. The network output never feeds back into the SPMT.
Prediction predict(const HybridModel& model, double soc0, const CurrentProfile& profile,
                   double T0, double T_amb);

struct HybridTrainConfig
{
    fnn::TrainConfig fnn;
    std::vector<int> hidden = {32, 32};
    FeatureSet features = FeatureSet::full;
    double val_fraction = 0.1;
    /// Each (profile, soc0) trace is thinned by an even stride to at most this many
    /// rows before splitting; 0 keeps every row.
    std::size_t max_rows_per_trace = 0;

    void validate() const;
};

nlohmann::json to_json(const HybridTrainConfig& c);
HybridTrainConfig hybrid_train_config_from_json(const nlohmann::json& j, HybridTrainConfig base = {});

struct HybridTraining
{
    HybridModel model;
    std::vector<fnn::EpochStats> history;
    int best_epoch = 0;
    std::size_t train_rows = 0;
    std::size_t val_rows = 0;
};

/// Fits one network jointly over every training trace. Validation rows are a
/// seeded per-trace sample; normalization is fitted on the remaining rows only.
HybridTraining train_hybrid(Wiring wiring, std::span<const truth::Dataset> train_sets,
                            const CellParameters& spmt_params, const HybridTrainConfig& config);

nlohmann::json to_json(const HybridModel& model);
/// Rebinds a stored model to `spmt_params`; throws FormatError if the stored
/// parameter hash differs.
HybridModel hybrid_from_json(const nlohmann::json& j, const CellParameters& spmt_params);
HybridModel load_hybrid(const std::filesystem::path& path, const CellParameters& spmt_params);

} // namespace spmtnet::hybrid
