#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace cptsq {

/// Serial execution is the reference path; parallel runs the same body under
/// OpenMP. Results must not depend on the choice.
enum class Execution { serial, parallel };

/// Calls body(i) for i in [0, n). Exceptions thrown by the body are collected
/// per index and the one with the lowest index is rethrown after the loop, so
/// the failure reported does not depend on scheduling.
template <class Body>
void for_each_index(std::size_t n, Execution ex, Body&& body) {
  if (ex == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cptsq
