#pragma once

#include <stdexcept>
#include <string>

namespace yannrl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// Raised when an ODE right-hand side returns a non-finite value.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, long component)
        : NumericalError(what), component_(component) {}
    [[nodiscard]] long component() const { return component_; }

private:
    long component_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : NumericalError(what), last_residual_(last_residual) {}
    [[nodiscard]] double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

/// Physical-domain violation, e.g. non-positive absolute temperature.
class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace yannrl
