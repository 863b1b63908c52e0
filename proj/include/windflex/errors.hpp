#pragma once

#include <stdexcept>
#include <string>

namespace windflex {

// Base class for everything this library throws on bad input or bad state.
// Validation-type failures (malformed or out-of-contract input) derive from
// ValidationError; unexpected runtime conditions derive from RuntimeFailure.
// The CLI maps the former to exit code 1 and the latter to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class RuntimeFailure : public Error {
public:
    using Error::Error;
};

// --- input/shape problems -------------------------------------------------

class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RangeViolation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class GapDetected : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class WrongHorizon : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientData : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --- estimation problems --------------------------------------------------

class NonPositiveSeasonality : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonStationary : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonStationaryFit : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MomentMatchFailure : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RankDeficient : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --- orchestration problems -----------------------------------------------

class EmptySurface : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class GridMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public RuntimeFailure {
public:
    using RuntimeFailure::RuntimeFailure;
};

} // namespace windflex
