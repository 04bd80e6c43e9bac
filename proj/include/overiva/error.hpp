#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace overiva {

enum class Errc {
  singular_matrix,
  not_positive_definite,
  not_hermitian,
  no_convergence,
  degenerate_block,
  signal_too_short,
  shape_mismatch,
  invalid_k,
  invalid_argument,
  invalid_spec,
  zero_reference,
  too_many_sources,
  unsupported_format,
  corrupt_file,
  io_failure,
};

const char* to_string(Errc code) noexcept;

// Every failure in the library surfaces as this exception. Numerical errors
// raised inside a per-frequency loop are re-thrown with the offending bin.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> bin() const noexcept { return bin_; }

  Error at_bin(std::size_t bin) const;

  bool numerical() const noexcept;

 private:
  Errc code_;
  std::optional<std::size_t> bin_;
};

}  // namespace overiva
