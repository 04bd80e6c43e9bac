#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include "overiva/error.hpp"
#include "overiva/exec.hpp"

namespace overiva::detail {

[[noreturn]] inline void rethrow_for_bin(std::exception_ptr e, std::size_t bin) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    if (err.bin()) throw;
    throw err.at_bin(bin);
  }
}

// Runs fn(f) for every bin. In parallel mode exceptions are parked per bin and
// the one from the lowest bin is rethrown after the loop, so the reported
// failure does not depend on scheduling.
template <class Fn>
void for_each_bin(std::size_t bins, Exec exec, Fn&& fn) {
  if (!exec.parallel()) {
    for (std::size_t f = 0; f < bins; ++f) {
      try {
        fn(f);
      } catch (...) {
        rethrow_for_bin(std::current_exception(), f);
      }
    }
    return;
  }
  std::vector<std::exception_ptr> errors(bins);
  const long n = static_cast<long>(bins);
#pragma omp parallel for num_threads(exec.threads) schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto f = static_cast<std::size_t>(i);
    try {
      fn(f);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (std::size_t f = 0; f < bins; ++f) {
    if (errors[f]) rethrow_for_bin(errors[f], f);
  }
}

}  // namespace overiva::detail
