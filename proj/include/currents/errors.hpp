#pragma once

#include <stdexcept>
#include <string>

namespace currents {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- geometry / ingest ----

/// An input violated a documented geometric invariant.
struct ValidationError : Error {
    using Error::Error;
};

struct TooFewPoints : ValidationError {
    using ValidationError::ValidationError;
};

struct DegenerateSegment : ValidationError {
    using ValidationError::ValidationError;
};

struct DegenerateFace : ValidationError {
    using ValidationError::ValidationError;
};

struct IndexOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};

struct NonOrthogonalRotation : ValidationError {
    using ValidationError::ValidationError;
};

/// File could not be parsed; the message carries path and line position.
struct ParseError : Error {
    using Error::Error;
};

// ---- rkhs ----

struct DimensionMismatch : Error {
    using Error::Error;
};

struct EmptySample : Error {
    using Error::Error;
};

struct DegeneratePointCloud : Error {
    using Error::Error;
};

// ---- clustering ----

struct InvalidK : Error {
    using Error::Error;
};

struct EmptyGram : Error {
    using Error::Error;
};

struct EmptyCluster : Error {
    using Error::Error;
};

struct SingleCluster : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

// ---- synth ----

struct BadFamilyParams : Error {
    using Error::Error;
};

// ---- cli / sizing ----

struct EmptyInput : Error {
    using Error::Error;
};

struct EmptyBand : Error {
    using Error::Error;
};

struct MissingMetadataKey : Error {
    using Error::Error;
};

}  // namespace currents
