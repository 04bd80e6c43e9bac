#include "overiva/error.hpp"

namespace overiva {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::singular_matrix: return "SingularMatrix";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::degenerate_block: return "DegenerateBlock";
    case Errc::signal_too_short: return "SignalTooShort";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::invalid_k: return "InvalidK";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::zero_reference: return "ZeroReference";
    case Errc::too_many_sources: return "TooManySources";
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::corrupt_file: return "CorruptFile";
    case Errc::io_failure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::at_bin(std::size_t bin) const {
  Error e(code_, std::string(what()).substr(std::string(to_string(code_)).size() + 2) +
                     " (frequency bin " + std::to_string(bin) + ")");
  e.bin_ = bin;
  return e;
}

bool Error::numerical() const noexcept {
  switch (code_) {
    case Errc::singular_matrix:
    case Errc::not_positive_definite:
    case Errc::not_hermitian:
    case Errc::no_convergence:
    case Errc::degenerate_block:
      return true;
    default:
      return false;
  }
}

}  // namespace overiva
