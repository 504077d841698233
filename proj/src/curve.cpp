#include "spmtnet/curve.hpp"

#include <algorithm>
#include <cmath>

#include "spmtnet/errors.hpp"

namespace spmtnet {

TabulatedCurve::TabulatedCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y))
{
    if (x_.size() != y_.size())
        throw FormatError("curve: abscissa and ordinate lengths differ");
    if (x_.size() < 2)
        throw FormatError("curve: at least two points are required");
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
            throw FormatError("curve: non-finite table entry");
        if (i > 0 && !(x_[i] > x_[i - 1]))
            throw FormatError("curve: abscissa must be strictly increasing");
    }
}

TabulatedCurve TabulatedCurve::from_pairs(const std::vector<std::pair<double, double>>& pts)
{
    std::vector<double> x, y;
    x.reserve(pts.size());
    y.reserve(pts.size());
    for (const auto& [a, b] : pts) {
        x.push_back(a);
        y.push_back(b);
    }
    return {std::move(x), std::move(y)};
}

double TabulatedCurve::operator()(double x) const
{
    if (x <= x_.front())
        return y_.front();
    if (x >= x_.back())
        return y_.back();
    auto hi = std::upper_bound(x_.begin(), x_.end(), x);
    const auto i = static_cast<std::size_t>(hi - x_.begin());
    const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + w * (y_[i] - y_[i - 1]);
}

} // namespace spmtnet
