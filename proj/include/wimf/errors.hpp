#pragma once

#include <stdexcept>
#include <string>

namespace wimf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Carries the residual norm of the failed computation when one is available.
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Non-finite iterate after a gradient step; callers should shrink the step.
class DivergedStep : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace wimf
