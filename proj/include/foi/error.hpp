#pragma once

#include <stdexcept>
#include <string>

namespace foi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Operand rasters disagree in shape.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A window or rectangle does not fit the plane it is applied to.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document (JSON, raster header, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration: syntax, unknown keys or out-of-domain values.
class ConfigError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Well-formed input that violates a semantic constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A required input file does not exist.
class MissingInputError : public IoError {
 public:
  using IoError::IoError;
};

/// Stitching was asked to finish before every tile arrived.
class IncompleteInputError : public Error {
 public:
  using Error::Error;
};

class EmptyValidMaskError : public Error {
 public:
  EmptyValidMaskError() : Error("empty valid mask: no position qualifies for a field of interest") {}
  using Error::Error;
};

/// Correlation is undefined (too few samples or a constant series).
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace foi
