#pragma once
// Exception taxonomy shared by all engine modules. Every throwing contract in
// the library raises one of these; the CLI maps them onto exit codes.

#include <stdexcept>
#include <string>

namespace vsdyn {

// Root of the engine exception hierarchy.
struct Error : std::runtime_error {
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Operands disagree on dimensions (vector sizes, matrix shapes, label counts).
struct DimensionMismatch : Error {
  using Error::Error;
};

// A direction-dependent quantity (cosine, convergence limit) received a
// zero-norm vector.
struct ZeroVector : Error {
  using Error::Error;
};

// A matrix required to be symmetric deviates beyond the symmetry tolerance.
struct NotSymmetric : Error {
  using Error::Error;
};

// Cholesky factorization failed: the matrix is not positive definite.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

// A map path is empty or adjacent maps do not share an endpoint.
struct BrokenChain : Error {
  using Error::Error;
};

// The propagation origin is not a node of the influence graph.
struct UnknownOrigin : Error {
  using Error::Error;
};

// The propagation origin carries no representation above threshold.
struct OriginHoldsNothing : Error {
  using Error::Error;
};

// The designated leader is not a node of the influence graph.
struct UnknownLeader : Error {
  using Error::Error;
};

// A probability parameter lies outside (0, 1].
struct BadProbability : Error {
  using Error::Error;
};

// A persuasion target is unreachable because the map annihilates the input.
struct ZeroImage : Error {
  using Error::Error;
};

// The interpretation map has a nontrivial null space where injectivity is
// required.
struct NotInjective : Error {
  using Error::Error;
};

// No interpretation map is registered for a required (source, target) pair.
struct MissingMap : Error {
  using Error::Error;
};

// An election was requested over an empty candidate list.
struct NoCandidates : Error {
  using Error::Error;
};

// A value-space extension reused an existing axis label.
struct DuplicateAxisLabel : Error {
  using Error::Error;
};

// A coordinate index is out of range or repeated where uniqueness is required.
struct BadIndex : Error {
  using Error::Error;
};

// A scalar parameter violates its documented range (e.g. blend weights).
struct BadParameter : Error {
  using Error::Error;
};

// An operation that requires a specific valuation kind received another.
struct BadValuationKind : Error {
  using Error::Error;
};

// A file could not be read or written.
struct IoFailure : Error {
  using Error::Error;
};

}  // namespace vsdyn
