#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loadtex {

enum class Errc {
  MalformedFile,
  UnsupportedFormat,
  OutOfBounds,
  DegenerateOutput,
  DegenerateInput,
  ConfigError,
  NegativeEntry,
  InsufficientSamples,
  NumericalFailure,
  DimensionMismatch,
  EmptyInput,
  DegenerateLabels,
  ParseError,
  MissingFile,
  EmptyClass,
  InsufficientImages,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Library-wide exception. `code()` identifies the failure class; `what()`
/// carries the name of the failing item (file, stage, parameter).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace loadtex
