#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace cfdx {

// Runs fn(i) for i in [0, n) on the OpenMP team. If any call throws, the
// exception of the lowest index is rethrown after the loop, so failures are
// reported deterministically regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cfdx
