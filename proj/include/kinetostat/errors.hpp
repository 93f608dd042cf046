#pragma once

#include <stdexcept>
#include <string>

namespace kinetostat {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or physically invalid model, or arguments inconsistent with it.
class ModelError : public Error {
public:
    using Error::Error;
};

class OutOfWorkspaceError : public Error {
public:
    OutOfWorkspaceError(const std::string& what, double closest_distance)
        : Error(what), closest_distance_(closest_distance) {}

    /// Pose error of the closest configuration the solver could reach.
    double closest_distance() const noexcept { return closest_distance_; }

private:
    double closest_distance_;
};

class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// K_theta - H_theta_theta lost invertibility under load.
class SpringSofteningError : public SingularityError {
public:
    using SingularityError::SingularityError;
};

class ControlSingularityError : public SingularityError {
public:
    using SingularityError::SingularityError;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

}  // namespace kinetostat
