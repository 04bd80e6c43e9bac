#include "overiva/exec.hpp"

#include <charconv>
#include <cstdlib>
#include <thread>

namespace overiva {

std::optional<int> parse_threads(std::string_view text) {
  if (text == "auto") {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }
  int n = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || end != text.data() + text.size() || n < 1) return std::nullopt;
  return n;
}

int threads_from_env() {
  const char* v = std::getenv("OVERIVA_THREADS");
  if (v == nullptr) return 1;
  return parse_threads(v).value_or(1);
}

}  // namespace overiva
