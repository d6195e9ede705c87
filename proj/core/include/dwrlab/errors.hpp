#pragma once

#include <stdexcept>
#include <string>

namespace dwrlab {

/// Base class for all failures raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class UnsupportedOrder : public Error {
public:
    using Error::Error;
};

class InvalidBounds : public Error {
public:
    using Error::Error;
};

class OrderOutOfRange : public Error {
public:
    using Error::Error;
};

class NotNested : public Error {
public:
    using Error::Error;
};

class IncompatibleOutput : public Error {
public:
    using Error::Error;
};

class NotAvailable : public Error {
public:
    using Error::Error;
};

class NewtonDivergence : public Error {
public:
    using Error::Error;
};

class MissingTrajectory : public Error {
public:
    using Error::Error;
};

class SizeLimitExceeded : public Error {
public:
    using Error::Error;
};

class TruthTooSmall : public Error {
public:
    using Error::Error;
};

class InvalidFraction : public Error {
public:
    using Error::Error;
};

class MaxIterations : public Error {
public:
    using Error::Error;
};

/// Config / expression parsing failures carry a position (byte offset or line).
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t position)
        : Error(what), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class UnknownIdentifier : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line) : Error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& key, const std::string& reason)
        : Error("config key '" + key + "': " + reason), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class CaseFailure : public Error {
public:
    using Error::Error;
};

} // namespace dwrlab
