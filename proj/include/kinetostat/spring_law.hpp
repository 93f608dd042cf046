#pragma once

#include <string_view>

namespace kinetostat {

enum class SpringBranch { Linear, PositivePart, NegativePart };

std::string_view to_string(SpringBranch b);
SpringBranch spring_branch_from_string(std::string_view s);

/// Piecewise-linear preload characteristic tau = k * h(v - offset), where h
/// is the identity, its positive part or its negative part.
struct SpringLaw {
    double k = 0.0;
    double preload_offset = 0.0;
    SpringBranch branch = SpringBranch::Linear;

    /// Engaged at v. One-sided springs are disengaged exactly at the offset.
    bool engaged(double v) const;
};

double spring_torque(const SpringLaw& law, double v);

/// Stored energy; spring_torque is its derivative.
double spring_energy(const SpringLaw& law, double v);

}  // namespace kinetostat
