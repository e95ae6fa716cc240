#pragma once

#include <mutex>

namespace spdekit::detail {

/// Serializes FFTW planner calls, which are not reentrant.
std::mutex& fftw_planner_mutex();

}  // namespace spdekit::detail
