#include "spmtnet/profile.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"

namespace spmtnet {

namespace {

constexpr double kPeakCRate = 10.0;

struct PulseShape
{
    double mean_gap;  // s between pulse onsets
    double min_len, max_len;
    double min_amp, max_amp;
    int smoothing;    // moving-average window, s
};

PulseShape shape_for(DriveFamily f)
{
    switch (f) {
    case DriveFamily::udds:
        return {30.0, 6.0, 30.0, 0.10, 0.55, 5};
    case DriveFamily::us06:
        return {70.0, 30.0, 90.0, 0.55, 1.00, 9};
    }
    return {};
}

} // namespace

std::string to_string(DriveFamily f)
{
    return f == DriveFamily::udds ? "udds" : "us06";
}

DriveFamily drive_family_from_string(const std::string& s)
{
    if (s == "udds" || s == "udds-like")
        return DriveFamily::udds;
    if (s == "us06" || s == "us06-like")
        return DriveFamily::us06;
    throw FormatError("unknown drive-cycle family '" + s + "'");
}

double CurrentProfile::at(double t) const
{
    if (current.empty())
        return 0.0;
    // Nudge so that t = k * dt lands on sample k despite rounding.
    auto k = static_cast<long long>(std::floor(t + 1e-9));
    k = std::clamp<long long>(k, 0, static_cast<long long>(current.size()) - 1);
    return current[static_cast<std::size_t>(k)];
}

std::string constant_label(double c_rate)
{
    return "CC-" + io::format_double(c_rate) + "C";
}

CurrentProfile make_constant_profile(double c_rate, double capacity_Ah, double t_end)
{
    if (!(c_rate > 0.0))
        throw DomainError("make_constant_profile: c_rate must be positive");
    if (!(capacity_Ah > 0.0) || !(t_end > 0.0))
        throw DomainError("make_constant_profile: capacity and t_end must be positive");
    CurrentProfile p;
    p.spec.kind = ProfileKind::constant;
    p.spec.label = constant_label(c_rate);
    p.spec.c_rate = c_rate;
    p.spec.t_end = t_end;
    p.capacity_Ah = capacity_Ah;
    p.current.assign(static_cast<std::size_t>(std::ceil(t_end)), c_rate * capacity_Ah);
    return p;
}

CurrentProfile make_drive_cycle(std::uint64_t seed, DriveFamily family, double capacity_Ah,
                                double t_end, std::string label)
{
    if (t_end < 600.0)
        throw DomainError("make_drive_cycle: t_end must be at least 600 s");
    if (!(capacity_Ah > 0.0))
        throw DomainError("make_drive_cycle: capacity must be positive");

    const PulseShape shape = shape_for(family);
    const auto n = static_cast<std::size_t>(std::ceil(t_end));
    std::vector<double> raw(n, 0.0);

    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(1.0 / shape.mean_gap);
    std::uniform_real_distribution<double> len(shape.min_len, shape.max_len);
    std::uniform_real_distribution<double> amp(shape.min_amp, shape.max_amp);

    // First onset early so every cycle starts loading the cell within a minute.
    double onset = std::uniform_real_distribution<double>(5.0, 30.0)(rng);
    while (onset < static_cast<double>(n)) {
        const double duration = len(rng);
        const double a = amp(rng);
        const auto first = static_cast<std::size_t>(onset);
        const auto last = std::min(n, static_cast<std::size_t>(onset + duration));
        for (std::size_t k = first; k < last; ++k)
            raw[k] += a;
        onset += duration + gap(rng);
    }

    std::vector<double> smooth(n, 0.0);
    const int half = shape.smoothing / 2;
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        int count = 0;
        for (int o = -half; o <= half; ++o) {
            const auto idx = static_cast<long long>(k) + o;
            if (idx < 0 || idx >= static_cast<long long>(n))
                continue;
            acc += raw[static_cast<std::size_t>(idx)];
            ++count;
        }
        smooth[k] = acc / count;
    }

    const double peak = *std::max_element(smooth.begin(), smooth.end());
    if (!(peak > 0.0))
        throw DomainError("make_drive_cycle: generated an all-zero cycle");
    const double scale = kPeakCRate * capacity_Ah / peak;
    for (auto& v : smooth)
        v *= scale;

    CurrentProfile p;
    p.spec.kind = ProfileKind::drive_cycle;
    p.spec.family = family;
    p.spec.seed = seed;
    p.spec.t_end = t_end;
    p.spec.label = label.empty() ? to_string(family) + "-" + std::to_string(seed) : std::move(label);
    p.capacity_Ah = capacity_Ah;
    p.current = std::move(smooth);
    return p;
}

CurrentProfile make_profile(const ProfileSpec& spec, double capacity_Ah)
{
    CurrentProfile p = (spec.kind == ProfileKind::constant)
                           ? make_constant_profile(spec.c_rate, capacity_Ah, spec.t_end)
                           : make_drive_cycle(spec.seed, spec.family, capacity_Ah, spec.t_end,
                                              spec.label);
    if (!spec.label.empty())
        p.spec.label = spec.label;
    return p;
}

} // namespace spmtnet
