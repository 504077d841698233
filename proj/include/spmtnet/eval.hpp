#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spmtnet/hybrid.hpp"
#include "spmtnet/profile.hpp"
#include "spmtnet/truth.hpp"

namespace spmtnet::eval {

/// Root-mean-square error of two voltage series given in volts, returned in mV.
double rmse_mv(std::span<const double> v_true, std::span<const double> v_model);

/// Relative error reduction in percent; nullopt when rmse_spmt is not positive.
std::optional<double> rer(double rmse_spmt, double rmse_hybrid);

struct EvalRow
{
    std::string profile;
    ProfileSpec spec;
    std::optional<double> soc0; // nullopt for rows pooled over soc0
    std::size_t samples = 0;
    double rmse_spmt = 0.0;   // mV
    double rmse_hybrid = 0.0; // mV
    std::optional<double> rer; // %
    bool partial = false;      // SPMT stopped before the truth trace ended
    std::string error;         // non-empty if the cell failed

    bool ok() const { return error.empty(); }
};

struct EvalReport
{
    std::string model;  // e.g. "hybrid-1"
    std::string split;  // "train" or "test"
    std::string column; // hybrid column heading, e.g. "HYBRID-I"
    std::vector<EvalRow> rows;   // one per (profile, soc0)
    std::vector<EvalRow> pooled; // one per profile
    /// Means over pooled constant-current rows at 3C and above.
    std::optional<double> mean_high_c_rer;
    std::optional<double> mean_high_c_rmse_hybrid;
    nlohmann::json provenance = nlohmann::json::object();

    bool all_failed() const;
    const EvalRow* find_pooled(const std::string& profile) const;
};

struct PlotSeries
{
    truth::DatasetInfo info;
    std::vector<double> t, V_true, V_spmt, V_hybrid;
};

struct MatrixResult
{
    EvalReport report;
    std::vector<PlotSeries> plots;
};

bool is_high_c(const ProfileSpec& spec);

/// Predicts every dataset with `model` and scores it against the stored truth over
/// the samples both traces share. Failures become row-level errors. Cells run on
/// up to `threads` workers; the report is assembled in dataset order.
MatrixResult run_matrix(const hybrid::HybridModel& model, std::span<const truth::Dataset> datasets,
                        const std::string& split, const std::string& model_label, int threads = 1);

std::string report_csv(const EvalReport& r);
std::string report_table(const EvalReport& r);
std::string plot_csv(const PlotSeries& p);

} // namespace spmtnet::eval
