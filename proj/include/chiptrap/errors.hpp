#pragma once

#include <stdexcept>
#include <string>

namespace chiptrap {

// Process exit codes shared by the CLI and the acceptance runner.
enum class ExitCode : int {
    Ok = 0,
    Config = 2,
    Numerical = 3,
    Acceptance = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::Numerical; }
};

// Bad user input: malformed config, non-finite numbers, violated preconditions.
class InputError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Config; }
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GridTooSmallError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GaugeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ParityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AccuracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GapClosedError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class OptimizerError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class PropagatorError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace chiptrap
