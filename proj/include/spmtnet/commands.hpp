#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spmtnet/eval.hpp"
#include "spmtnet/hybrid.hpp"
#include "spmtnet/params.hpp"

/// The four pipeline commands behind the spmtnet executable. Each reads its
/// inputs in full before writing anything and writes every file atomically.
namespace spmtnet::app {

namespace fs = std::filesystem;

/// Overrides applied on top of the parameter file.
struct SolverOverrides
{
    std::optional<int> N_r;
    std::optional<double> dt;
};

CellParameters load_cell(const fs::path& params, const SolverOverrides& solver);

struct GenDataOptions
{
    fs::path params;
    fs::path truth;
    fs::path out;
    std::optional<std::uint64_t> seed;
    SolverOverrides solver;
};

struct GenDataResult
{
    std::string manifest_sha256;
    std::size_t train_entries = 0;
    std::size_t test_entries = 0;
    std::size_t rows = 0;
};

GenDataResult gen_data(const GenDataOptions& o, std::ostream& log);

struct TrainOptions
{
    fs::path params;
    fs::path data;
    fs::path out;
    std::optional<fs::path> config; // training JSON; built-in defaults otherwise
    hybrid::Wiring wiring = hybrid::Wiring::residual;
    std::optional<hybrid::FeatureSet> features;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::string name; // model file stem; derived from wiring and features if empty
    SolverOverrides solver;
};

struct TrainOutput
{
    fs::path model_file;
    fs::path history_file;
    hybrid::HybridTraining training;
};

std::string default_model_name(hybrid::Wiring w, hybrid::FeatureSet f);
std::string history_csv(const std::vector<fnn::EpochStats>& history);

TrainOutput train(const TrainOptions& o, std::ostream& log);

struct EvalOptions
{
    fs::path params;
    fs::path data;
    std::vector<fs::path> models;
    fs::path out;
    std::vector<std::string> splits = {"train", "test"};
    int threads = 1;
    SolverOverrides solver;
};

/// Reports in the order (model, split). Throws Error only for input problems;
/// failed matrix cells are recorded inside the reports.
std::vector<eval::EvalReport> evaluate(const EvalOptions& o, std::ostream& log);

struct SimulateOptions
{
    fs::path params;
    std::string profile = "cc:1"; // cc:<rate> | udds:<seed> | us06:<seed> | rest
    double soc0 = 1.0;
    double T_amb = 298.15;
    std::optional<double> t_end;
    std::optional<fs::path> model;
    std::optional<fs::path> out; // stdout when empty
    SolverOverrides solver;
};

CurrentProfile parse_profile(const std::string& text, double capacity_Ah, std::optional<double> t_end);

/// Returns the trace CSV that was written.
std::string simulate(const SimulateOptions& o, std::ostream& out, std::ostream& log);

/// 0 success, 1 usage or input error, 2 numerical failure.
int exit_code_for(const std::exception& e);

} // namespace spmtnet::app
