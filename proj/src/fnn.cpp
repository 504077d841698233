#include "spmtnet/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet::fnn {

using nlohmann::json;

std::string to_string(Activation a)
{
    return a == Activation::relu ? "relu" : "linear";
}

Activation activation_from_string(const std::string& s)
{
    if (s == "relu")
        return Activation::relu;
    if (s == "linear")
        return Activation::linear;
    throw FormatError("unknown activation '" + s + "'");
}

std::size_t FnnModel::parameter_count() const
{
    std::size_t n = 0;
    for (const Layer& l : layers)
        n += static_cast<std::size_t>(l.W.size() + l.b.size());
    return n;
}

void FnnModel::validate() const
{
    if (layers.empty())
        throw DimensionError("fnn: model has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        if (l.b.size() != l.W.rows())
            throw DimensionError("fnn: bias length does not match layer " + std::to_string(i));
        if (i > 0 && l.W.cols() != layers[i - 1].W.rows())
            throw DimensionError("fnn: layer " + std::to_string(i) + " input width mismatch");
    }
    if (layers.back().W.rows() != 1 || layers.back().activation != Activation::linear)
        throw DimensionError("fnn: output layer must be a single linear unit");
    if (norm.mean.size() != input_dim() || norm.std.size() != input_dim())
        throw DimensionError("fnn: normalization width does not match the input layer");
    if ((norm.std.array() <= 0.0).any())
        throw DimensionError("fnn: normalization std entries must be positive");
}

FnnModel make_model(std::span<const int> widths, std::uint64_t seed)
{
    if (widths.size() < 2)
        throw DimensionError("make_model: need at least input and output widths");
    if (widths.back() != 1)
        throw DimensionError("make_model: output width must be 1");
    std::mt19937_64 rng(seed);
    FnnModel m;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const int in = widths[i];
        const int out = widths[i + 1];
        if (in <= 0 || out <= 0)
            throw DimensionError("make_model: widths must be positive");
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in));
        Layer l;
        l.W.resize(out, in);
        for (Eigen::Index r = 0; r < l.W.rows(); ++r)
            for (Eigen::Index c = 0; c < l.W.cols(); ++c)
                l.W(r, c) = dist(rng);
        l.b = Eigen::VectorXd::Zero(out);
        l.activation = (i + 2 == widths.size()) ? Activation::linear : Activation::relu;
        m.layers.push_back(std::move(l));
    }
    m.norm.mean = Eigen::VectorXd::Zero(widths.front());
    m.norm.std = Eigen::VectorXd::Ones(widths.front());
    return m;
}

Normalization fit_normalization(const Eigen::MatrixXd& X)
{
    if (X.rows() < 2)
        throw DimensionError("fit_normalization: need at least two samples");
    Normalization n;
    n.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - n.mean.transpose();
    n.std = (centered.array().square().colwise().sum() / static_cast<double>(X.rows()))
                .sqrt()
                .transpose();
    n.std = n.std.cwiseMax(1e-12);
    return n;
}

namespace {

// Columns are samples.
Eigen::MatrixXd normalized_columns(const FnnModel& m, const Eigen::MatrixXd& X)
{
    if (X.cols() != m.input_dim())
        throw DimensionError("fnn: expected " + std::to_string(m.input_dim()) + " features, got " +
                             std::to_string(X.cols()));
    return ((X.rowwise() - m.norm.mean.transpose()).array().rowwise() /
            m.norm.std.transpose().array())
        .matrix()
        .transpose();
}

void activate(Eigen::MatrixXd& z, Activation a)
{
    if (a == Activation::relu)
        z = z.cwiseMax(0.0);
}

struct ForwardCache
{
    std::vector<Eigen::MatrixXd> inputs; // input to each layer
    std::vector<Eigen::MatrixXd> pre;    // pre-activations
    Eigen::MatrixXd output;
};

ForwardCache forward_cached(const FnnModel& m, const Eigen::MatrixXd& X)
{
    ForwardCache c;
    Eigen::MatrixXd a = normalized_columns(m, X);
    for (const Layer& l : m.layers) {
        c.inputs.push_back(a);
        Eigen::MatrixXd z = (l.W * a).colwise() + l.b;
        c.pre.push_back(z);
        activate(z, l.activation);
        a = std::move(z);
    }
    c.output = std::move(a);
    return c;
}

// Gradient of sum_i (y_i - g(x_i))^2 scaled by `scale`.
Gradients scaled_gradient(const FnnModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double scale)
{
    const ForwardCache c = forward_cached(m, X);
    Eigen::MatrixXd delta = (2.0 * scale) * (c.output.row(0).transpose() - y).transpose();
    Gradients g;
    g.dW.resize(m.layers.size());
    g.db.resize(m.layers.size());
    for (std::size_t i = m.layers.size(); i-- > 0;) {
        const Layer& l = m.layers[i];
        if (l.activation == Activation::relu)
            delta = delta.cwiseProduct((c.pre[i].array() > 0.0).cast<double>().matrix());
        g.dW[i] = delta * c.inputs[i].transpose();
        g.db[i] = delta.rowwise().sum();
        if (i > 0)
            delta = l.W.transpose() * delta;
    }
    return g;
}

void check_batch(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    if (X.rows() == 0)
        throw DimensionError("fnn: empty batch");
    if (X.rows() != y.size())
        throw DimensionError("fnn: input and target counts differ");
}

double rmse_of(const FnnModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    return std::sqrt(mse_loss(m, X, y));
}

} // namespace

double forward(const FnnModel& model, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != model.input_dim())
        throw DimensionError("forward: expected " + std::to_string(model.input_dim()) +
                             " features, got " + std::to_string(x.size()));
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        row(0, static_cast<Eigen::Index>(i)) = x[i];
    return predict(model, row)(0);
}

Eigen::VectorXd predict(const FnnModel& model, const Eigen::MatrixXd& X)
{
    Eigen::MatrixXd a = normalized_columns(model, X);
    for (const Layer& l : model.layers) {
        Eigen::MatrixXd z = (l.W * a).colwise() + l.b;
        activate(z, l.activation);
        a = std::move(z);
    }
    return a.row(0).transpose();
}

double mse_loss(const FnnModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    check_batch(X, y);
    return (predict(model, X) - y).squaredNorm() / static_cast<double>(y.size());
}

Gradients backward(const FnnModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    check_batch(X, y);
    return scaled_gradient(model, X, y, 1.0 / static_cast<double>(y.size()));
}

void TrainConfig::validate() const
{
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw DomainError("train: learning_rate must be finite and non-negative");
    if (batch_size < 1)
        throw DomainError("train: batch_size must be at least 1");
    if (epochs < 0)
        throw DomainError("train: epochs must be non-negative");
    if (threads < 1)
        throw DomainError("train: threads must be at least 1");
}

json to_json(const TrainConfig& c)
{
    return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
            {"epochs", c.epochs},               {"seed", c.seed},
            {"shuffle", c.shuffle},             {"patience", c.patience},
            {"threads", c.threads}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c)
{
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.shuffle = j.value("shuffle", c.shuffle);
    c.patience = j.value("patience", c.patience);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

TrainResult train(FnnModel model, const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                  const Eigen::MatrixXd& X_val, const Eigen::VectorXd& y_val,
                  const TrainConfig& config)
{
    config.validate();
    model.validate();
    check_batch(X_train, y_train);
    const bool has_val = X_val.rows() > 0;
    if (has_val)
        check_batch(X_val, y_val);

    TrainResult result;
    auto evaluate = [&](int epoch) {
        EpochStats s;
        s.epoch = epoch;
        s.train_rmse = rmse_of(model, X_train, y_train);
        s.val_rmse = has_val ? rmse_of(model, X_val, y_val) : s.train_rmse;
        result.history.push_back(s);
        if (!std::isfinite(s.train_rmse) || !std::isfinite(s.val_rmse)) {
            std::string msg = "train: loss diverged at epoch " + std::to_string(epoch) + "; history:";
            for (const EpochStats& h : result.history)
                msg += " [" + std::to_string(h.epoch) + ": " + io::format_double(h.train_rmse) + "]";
            throw DivergenceError(msg);
        }
        return s.val_rmse;
    };

    double best = evaluate(0);
    result.model = model;
    result.best_epoch = 0;

    const auto n = static_cast<std::size_t>(X_train.rows());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(config.seed);
    const auto batch = static_cast<std::size_t>(config.batch_size);
    Eigen::MatrixXd xb;
    Eigen::VectorXd yb;
    int stale = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle)
            std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            xb.resize(static_cast<Eigen::Index>(len), X_train.cols());
            yb.resize(static_cast<Eigen::Index>(len));
            for (std::size_t r = 0; r < len; ++r) {
                xb.row(static_cast<Eigen::Index>(r)) = X_train.row(order[start + r]);
                yb(static_cast<Eigen::Index>(r)) = y_train(order[start + r]);
            }

            Gradients g;
            if (config.threads > 1 && len >= static_cast<std::size_t>(config.threads)) {
                // Fixed chunk boundaries and in-order reduction keep the sum reproducible.
                const auto chunks = static_cast<std::size_t>(config.threads);
                const double scale = 1.0 / static_cast<double>(len);
                std::vector<std::future<Gradients>> parts;
                for (std::size_t c = 0; c < chunks; ++c) {
                    const auto lo = static_cast<Eigen::Index>(c * len / chunks);
                    const auto hi = static_cast<Eigen::Index>((c + 1) * len / chunks);
                    parts.push_back(std::async(std::launch::async, [&, lo, hi] {
                        return scaled_gradient(model, xb.middleRows(lo, hi - lo),
                                               yb.segment(lo, hi - lo), scale);
                    }));
                }
                g = parts[0].get();
                for (std::size_t c = 1; c < chunks; ++c) {
                    Gradients part = parts[c].get();
                    for (std::size_t l = 0; l < g.dW.size(); ++l) {
                        g.dW[l] += part.dW[l];
                        g.db[l] += part.db[l];
                    }
                }
            } else {
                g = backward(model, xb, yb);
            }
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                model.layers[l].W -= config.learning_rate * g.dW[l];
                model.layers[l].b -= config.learning_rate * g.db[l];
            }
        }

        const double score = evaluate(epoch);
        if (score < best) {
            best = score;
            result.model = model;
            result.best_epoch = epoch;
            stale = 0;
        } else if (config.patience > 0 && ++stale >= config.patience) {
            break;
        }
    }
    return result;
}

json to_json(const FnnModel& model)
{
    json layers = json::array();
    for (const Layer& l : model.layers) {
        json W = json::array();
        for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < l.W.cols(); ++c)
                row.push_back(l.W(r, c));
            W.push_back(std::move(row));
        }
        layers.push_back({{"in", l.W.cols()},
                          {"out", l.W.rows()},
                          {"activation", to_string(l.activation)},
                          {"W", std::move(W)},
                          {"b", std::vector<double>(l.b.data(), l.b.data() + l.b.size())}});
    }
    const auto& n = model.norm;
    return {{"format", "spmtnet-fnn/1"},
            {"layers", std::move(layers)},
            {"normalization",
             {{"mean", std::vector<double>(n.mean.data(), n.mean.data() + n.mean.size())},
              {"std", std::vector<double>(n.std.data(), n.std.data() + n.std.size())}}}};
}

FnnModel model_from_json(const json& j)
{
    FnnModel m;
    try {
        for (const auto& lj : j.at("layers")) {
            Layer l;
            const auto in = lj.at("in").get<Eigen::Index>();
            const auto out = lj.at("out").get<Eigen::Index>();
            l.activation = activation_from_string(lj.at("activation").get<std::string>());
            l.W.resize(out, in);
            const auto& W = lj.at("W");
            if (static_cast<Eigen::Index>(W.size()) != out)
                throw DimensionError("fnn file: weight row count mismatch");
            for (Eigen::Index r = 0; r < out; ++r) {
                if (static_cast<Eigen::Index>(W[r].size()) != in)
                    throw DimensionError("fnn file: weight column count mismatch");
                for (Eigen::Index c = 0; c < in; ++c)
                    l.W(r, c) = W[r][c].get<double>();
            }
            const auto b = lj.at("b").get<std::vector<double>>();
            l.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
            m.layers.push_back(std::move(l));
        }
        const auto mean = j.at("normalization").at("mean").get<std::vector<double>>();
        const auto std = j.at("normalization").at("std").get<std::vector<double>>();
        m.norm.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        m.norm.std = Eigen::Map<const Eigen::VectorXd>(std.data(), static_cast<Eigen::Index>(std.size()));
    } catch (const json::exception& e) {
        throw FormatError(std::string("fnn file: ") + e.what());
    }
    m.validate();
    return m;
}

} // namespace spmtnet::fnn
