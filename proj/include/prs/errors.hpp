// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace prs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateQuad : Error {
  using Error::Error;
};
struct DegenerateFrame : Error {
  using Error::Error;
};
struct RejectionStall : Error {
  using Error::Error;
};
struct InvalidAlpha : Error {
  using Error::Error;
};
struct GridTooLarge : Error {
  using Error::Error;
};
struct CalibrationFailed : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct BadMagic : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace prs
