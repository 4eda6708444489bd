#pragma once

#include <cstddef>
#include <exception>

namespace dhym::detail {

/// Runs fn(i) for i in [0, count), data-parallel when OpenMP is enabled.
/// The first exception thrown by any iteration is rethrown after the loop.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    std::exception_ptr error;
    const long n = static_cast<long>(count);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(dhym_parallel_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace dhym::detail
