#pragma once

#include <stdexcept>
#include <string>

namespace hilbext {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  /// Short machine-readable name, echoed verbatim by the CLI.
  [[nodiscard]] virtual const char* kind() const noexcept { return "Error"; }
};

/// A precondition on a scalar argument (size, radius, count) was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "InvalidArgument"; }
};

class InvalidMesh : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "InvalidMesh"; }
};

class InvalidBundle : public Error {
public:
  enum class Reason { Shape, NotIdempotent, NotSelfAdjoint, RankJump, EdgeDiscontinuity };

  InvalidBundle(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  [[nodiscard]] Reason reason() const noexcept { return reason_; }
  [[nodiscard]] const char* kind() const noexcept override { return "InvalidBundle"; }

private:
  Reason reason_;
};

class InvalidSection : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "InvalidSection"; }
};

/// Two objects that must live over the same bundle/space do not.
class BundleMismatch : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "BundleMismatch"; }
};

class InvalidIsometry : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "InvalidIsometry"; }
};

/// Shapes, dimensions or vertex correspondences of two inputs are incompatible.
class IncompatibleData : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "IncompatibleData"; }
};

/// A circle-valued loop is sampled too coarsely to be lifted.
class LiftFailure : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "LiftFailure"; }
};

/// A tower or truncation sequence failed to settle within its tolerance or cap.
class NonStabilizing : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "NonStabilizing"; }
};

/// Invariant records disagree across tower levels.
class Unstable : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "Unstable"; }
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "ShapeMismatch"; }
};

}  // namespace hilbext
