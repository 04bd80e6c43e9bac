#pragma once

#include <optional>
#include <string_view>

namespace overiva {

// Per-frequency parallelism. threads == 1 runs the loops serially; larger
// values fan bins out over an OpenMP team. Results do not depend on the
// thread count: every bin is computed by the same code in the same order.
struct Exec {
  int threads = 1;

  bool parallel() const noexcept { return threads > 1; }
};

// "auto" -> hardware concurrency, otherwise a positive integer.
std::optional<int> parse_threads(std::string_view text);
// Reads OVERIVA_THREADS; falls back to 1.
int threads_from_env();

}  // namespace overiva
