#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spmtnet {

enum class ProfileKind { constant, drive_cycle };
enum class DriveFamily { udds, us06 };

std::string to_string(DriveFamily f);
DriveFamily drive_family_from_string(const std::string& s);

/// Everything needed to regenerate a profile bit-for-bit.
struct ProfileSpec
{
    ProfileKind kind = ProfileKind::constant;
    std::string label;
    double c_rate = 0.0; // constant profiles
    DriveFamily family = DriveFamily::udds;
    std::uint64_t seed = 0; // drive cycles
    double t_end = 0.0;     // s
};

/// Applied current sampled at 1 s; sample k holds over [k, k+1). Discharge positive.
struct CurrentProfile
{
    ProfileSpec spec;
    double capacity_Ah = 0.0;
    std::vector<double> current;

    double at(double t) const;
    double duration() const { return static_cast<double>(current.size()); }
};

std::string constant_label(double c_rate);

CurrentProfile make_constant_profile(double c_rate, double capacity_Ah, double t_end);

/// Seeded synthetic drive cycle: smoothed random discharge pulses with rests,
/// rescaled so the peak current is exactly 10C. "udds" gives frequent moderate
/// pulses; "us06" gives fewer, longer, higher-amplitude pulses.
CurrentProfile make_drive_cycle(std::uint64_t seed, DriveFamily family, double capacity_Ah,
                                double t_end, std::string label = {});

CurrentProfile make_profile(const ProfileSpec& spec, double capacity_Ah);

} // namespace spmtnet
