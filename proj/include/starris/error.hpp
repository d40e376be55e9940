#pragma once

#include <stdexcept>
#include <string>

namespace starris {

// Base of every error the library throws. The CLI maps subclasses onto exit
// codes (ConfigError -> 2, everything numerical -> 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// A series or iteration hit its term cap before the stopping rule fired, or
// the series is known to diverge for the given arguments.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Non-finite intermediate or unacceptable loss of precision.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Parameter combination for which a quantity is undefined.
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Adaptive quadrature ran out of subdivisions before meeting tolerance.
class ToleranceError : public Error {
public:
    ToleranceError(const std::string& what, double achieved)
        : Error(what), achieved_error(achieved) {}
    double achieved_error;
};

// Malformed or invalid configuration document.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace starris
