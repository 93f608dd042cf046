#pragma once

#include <string>

#include "kinetostat/errors.hpp"

namespace kinetostat::detail {

/// Runs fn and rethrows any solver error with "chain <i>: " prepended,
/// keeping the exception type and its diagnostic payload.
template <typename Fn>
auto tag_chain(std::size_t index, Fn&& fn) -> decltype(fn()) {
    const std::string prefix = "chain " + std::to_string(index) + ": ";
    try {
        return fn();
    } catch (const SpringSofteningError& e) {
        throw SpringSofteningError(prefix + e.what(), e.condition());
    } catch (const ControlSingularityError& e) {
        throw ControlSingularityError(prefix + e.what(), e.condition());
    } catch (const SingularityError& e) {
        throw SingularityError(prefix + e.what(), e.condition());
    } catch (const NonConvergenceError& e) {
        throw NonConvergenceError(prefix + e.what(), e.best_residual());
    } catch (const OutOfWorkspaceError& e) {
        throw OutOfWorkspaceError(prefix + e.what(), e.closest_distance());
    } catch (const ModelError& e) {
        throw ModelError(prefix + e.what());
    }
}

}  // namespace kinetostat::detail
