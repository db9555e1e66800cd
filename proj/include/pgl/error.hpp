#pragma once

#include <stdexcept>
#include <string>

namespace pgl {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical kernel failed; carries the radius reached when one applies.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, double radius = 0.0)
        : Error(what), radius_(radius) {}

    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

}  // namespace pgl
