#pragma once

#include <stdexcept>
#include <string>

namespace lacunary {

/// Bad user input: malformed expressions, invalid moduli, forms outside a space.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The mathematics does not go through for this input.
struct MathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotInSpan : InputError {
  using InputError::InputError;
};

struct ConductorNotFound : MathError {
  using MathError::MathError;
};

struct SplittingFieldNeeded : MathError {
  using MathError::MathError;
};

struct SpanNotClosed : MathError {
  using MathError::MathError;
};

struct NotPure : MathError {
  using MathError::MathError;
};

} // namespace lacunary
