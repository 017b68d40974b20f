#pragma once

#include <stdexcept>
#include <string>

namespace pef {

/// Base for all library failures. The kind maps onto the CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Kind { Usage = 2, Data = 3, Numerical = 4 };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Malformed input, violated preconditions on data, I/O failures.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

/// Non-finite likelihoods, collapsing variance and similar optimizer failures.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(Kind::Numerical, what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(Kind::Usage, what) {}
};

} // namespace pef
