#pragma once

#include <mutex>

namespace heatvar::detail {

// FFTW planning is not thread-safe; every plan creation and destruction takes this lock.
std::mutex& fftw_planner_mutex();

}  // namespace heatvar::detail
