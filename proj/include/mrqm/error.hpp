#pragma once

#include <stdexcept>
#include <string>

namespace mrqm {

/// Failure classes. They map one-to-one onto the C API status codes and the
/// CLI exit codes (usage = 1, data = 2, degenerate = 3).
enum class ErrorKind {
    InvalidArgument,
    Data,
    Degenerate,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad parameters, unknown names, mismatched dimensions.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// Unreadable files, malformed headers, non-finite input values.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Input is well-formed but the quantity is mathematically undefined
/// (zero data range, constant image for a correlation, no edges, ...).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& what) : Error(ErrorKind::Degenerate, what) {}
};

} // namespace mrqm
