#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hcb {

enum class ErrorCode {
  BadFilling,
  BadGamma,
  BadScenario,
  DegenerateFermi,
  ComplexResidue,
  EmptySupport,
  Range,
  TooLarge,
  DegenerateGround,
  Cap,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadFilling: return "E_BAD_FILLING";
    case ErrorCode::BadGamma: return "E_BAD_GAMMA";
    case ErrorCode::BadScenario: return "E_BAD_SCENARIO";
    case ErrorCode::DegenerateFermi: return "E_DEGENERATE_FERMI";
    case ErrorCode::ComplexResidue: return "E_COMPLEX_RESIDUE";
    case ErrorCode::EmptySupport: return "E_EMPTY_SUPPORT";
    case ErrorCode::Range: return "E_RANGE";
    case ErrorCode::TooLarge: return "E_TOO_LARGE";
    case ErrorCode::DegenerateGround: return "E_DEGENERATE_GROUND";
    case ErrorCode::Cap: return "E_CAP";
    case ErrorCode::Io: return "E_IO";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hcb
