#pragma once

#include <stdexcept>
#include <string>

namespace p2t {

// Exit-code buckets used by the CLI: 2 = input/schema, 3 = numeric, 4 = missing artifact.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : InputError {
  using InputError::InputError;
};
struct UnknownPrimitive : InputError {
  using InputError::InputError;
};
struct NonScalarLoss : InputError {
  using InputError::InputError;
};
struct DisconnectedGraph : InputError {
  using InputError::InputError;
};
struct MissingGradient : InputError {
  using InputError::InputError;
};
struct InvalidConfig : InputError {
  using InputError::InputError;
};

struct SchemaError : InputError {
  using InputError::InputError;
};
struct NonMonotoneFrames : InputError {
  using InputError::InputError;
};
struct InsufficientContext : InputError {
  using InputError::InputError;
};
struct SingularFit : NumericError {
  using NumericError::NumericError;
};
struct MissingBall : InputError {
  using InputError::InputError;
};
struct MissingJoint : InputError {
  using InputError::InputError;
};
struct SeriesTooShort : InputError {
  using InputError::InputError;
};
struct InvalidParams : InputError {
  using InputError::InputError;
};

struct EmptyDataset : InputError {
  using InputError::InputError;
};
struct DivergedLoss : NumericError {
  using NumericError::NumericError;
};
struct HistoryTooShort : InputError {
  using InputError::InputError;
};

struct BadMagic : ArtifactError {
  using ArtifactError::ArtifactError;
};
struct VersionMismatch : ArtifactError {
  using ArtifactError::ArtifactError;
};
struct TruncatedPayload : ArtifactError {
  using ArtifactError::ArtifactError;
};
struct ShapeDirectoryMismatch : ArtifactError {
  using ArtifactError::ArtifactError;
};
struct MissingCheckpoint : ArtifactError {
  using ArtifactError::ArtifactError;
};

struct LengthMismatch : InputError {
  using InputError::InputError;
};
struct EmptySequence : InputError {
  using InputError::InputError;
};

}  // namespace p2t
