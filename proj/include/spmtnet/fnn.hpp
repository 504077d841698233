#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace spmtnet::fnn {

enum class Activation { relu, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer
{
    Eigen::MatrixXd W; // out x in
    Eigen::VectorXd b; // out
    Activation activation = Activation::relu;
};

/// Per-feature (mean, std); inputs are mapped to (x - mean) / std.
struct Normalization
{
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

/// Dense feedforward network with a scalar linear output.
struct FnnModel
{
    std::vector<Layer> layers;
    Normalization norm;

    int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
    std::size_t parameter_count() const;
    /// Throws DimensionError if shapes do not chain or the output is not a linear scalar.
    void validate() const;
};

/// He-initialized network with the given layer widths, e.g. {5, 32, 32, 1}.
/// Hidden layers use ReLU, the output layer is linear, biases start at zero,
/// and normalization starts as the identity.
FnnModel make_model(std::span<const int> widths, std::uint64_t seed);

/// Population statistics per column of X (rows are samples); std is floored at 1e-12.
Normalization fit_normalization(const Eigen::MatrixXd& X);

double forward(const FnnModel& model, std::span<const double> x);
Eigen::VectorXd predict(const FnnModel& model, const Eigen::MatrixXd& X);

/// (1/N) sum_i (y_i - g(x_i))^2.
double mse_loss(const FnnModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct Gradients
{
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

/// Exact gradient of mse_loss with respect to every weight and bias. The ReLU
/// derivative at zero is taken as zero.
Gradients backward(const FnnModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct TrainConfig
{
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 200;
    std::uint64_t seed = 1;
    bool shuffle = true;
    int patience = 20; // epochs without validation improvement; <= 0 disables
    int threads = 1;   // >1 splits each mini-batch into fixed chunks reduced in order

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct EpochStats
{
    int epoch = 0;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
};

struct TrainResult
{
    FnnModel model; // best-on-validation snapshot
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

/// Mini-batch SGD on the MSE. `initial.norm` must already hold statistics fitted
/// on the training inputs. Epoch 0 in the history is the untrained model. An
/// empty validation set selects on training RMSE instead.
TrainResult train(FnnModel initial, const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                  const Eigen::MatrixXd& X_val, const Eigen::VectorXd& y_val,
                  const TrainConfig& config);

nlohmann::json to_json(const FnnModel& model);
FnnModel model_from_json(const nlohmann::json& j);

} // namespace spmtnet::fnn
