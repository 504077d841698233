#pragma once

#include <span>
#include <utility>
#include <vector>

namespace spmtnet {

/// Piecewise-linear table y(x) with clamped extrapolation.
class TabulatedCurve
{
public:
    TabulatedCurve() = default;
    TabulatedCurve(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;

    std::span<const double> x() const { return x_; }
    std::span<const double> y() const { return y_; }
    bool empty() const { return x_.empty(); }

    static TabulatedCurve from_pairs(const std::vector<std::pair<double, double>>& pts);

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

} // namespace spmtnet
