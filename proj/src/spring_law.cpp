#include "kinetostat/spring_law.hpp"

#include <algorithm>
#include <string>

#include "kinetostat/errors.hpp"

namespace kinetostat {

std::string_view to_string(SpringBranch b) {
    switch (b) {
        case SpringBranch::Linear: return "linear";
        case SpringBranch::PositivePart: return "positive_part";
        case SpringBranch::NegativePart: return "negative_part";
    }
    return "?";
}

SpringBranch spring_branch_from_string(std::string_view s) {
    if (s == "linear") return SpringBranch::Linear;
    if (s == "positive_part") return SpringBranch::PositivePart;
    if (s == "negative_part") return SpringBranch::NegativePart;
    throw ModelError("unknown spring branch '" + std::string(s) + "'");
}

bool SpringLaw::engaged(double v) const {
    switch (branch) {
        case SpringBranch::Linear: return true;
        case SpringBranch::PositivePart: return v > preload_offset;
        case SpringBranch::NegativePart: return v < preload_offset;
    }
    return false;
}

double spring_torque(const SpringLaw& law, double v) {
    const double x = v - law.preload_offset;
    switch (law.branch) {
        case SpringBranch::Linear: return law.k * x;
        case SpringBranch::PositivePart: return law.k * std::max(x, 0.0);
        case SpringBranch::NegativePart: return law.k * std::min(x, 0.0);
    }
    return 0.0;
}

double spring_energy(const SpringLaw& law, double v) {
    const double tau = spring_torque(law, v);
    // tau is linear on the engaged side and zero elsewhere
    return law.k > 0.0 ? 0.5 * tau * tau / law.k : 0.0;
}

}  // namespace kinetostat
