#include "loadtex/error.hpp"

namespace loadtex {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedFile: return "MalformedFile";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::DegenerateOutput: return "DegenerateOutput";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::ConfigError: return "ConfigError";
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::ParseError: return "ParseError";
    case Errc::MissingFile: return "MissingFile";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::InsufficientImages: return "InsufficientImages";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace loadtex
