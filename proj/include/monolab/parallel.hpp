#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace monolab {

/// Serial is the reference path; parallel must reproduce it bit for bit.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, count). Iterations must be independent. The
/// first exception thrown by any iteration is rethrown after the loop.
template <class Body>
void for_each_index(Exec exec, std::size_t count, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace monolab
