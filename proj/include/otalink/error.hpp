#ifndef OTALINK_ERROR_HPP
#define OTALINK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace otalink {

enum class Errc {
  input_shape,
  validation,
  capacity,
  undefined_sinr,
  infeasible,
  insufficient_data,
  degenerate_channel,
  estimation,
  format,
  config,
  io,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc categories so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::input_shape: return "input-shape error";
    case Errc::validation: return "validation error";
    case Errc::capacity: return "capacity error";
    case Errc::undefined_sinr: return "undefined SINR";
    case Errc::infeasible: return "infeasible";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::degenerate_channel: return "degenerate channel";
    case Errc::estimation: return "estimation error";
    case Errc::format: return "format error";
    case Errc::config: return "config error";
    case Errc::io: return "I/O error";
  }
  return "error";
}

}  // namespace otalink

#endif  // OTALINK_ERROR_HPP
