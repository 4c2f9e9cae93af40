#pragma once

#include <stdexcept>
#include <string>

namespace dradapt {

// Root of every library error. The CLI maps ValidationError (and its
// subclasses) to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class LookupError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Raised when a metric is undefined for the input, e.g. zero distance variance.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

class ProjectionError : public Error {
public:
    ProjectionError(std::string technique, int iteration, const std::string& what)
        : Error(technique + " failed at iteration " + std::to_string(iteration) + ": " + what),
          technique_(std::move(technique)),
          iteration_(iteration) {}

    const std::string& technique() const noexcept { return technique_; }
    int iteration() const noexcept { return iteration_; }

private:
    std::string technique_;
    int iteration_;
};

class ExternalTechniqueError : public Error {
public:
    ExternalTechniqueError(const std::string& what, int exit_code, std::string diagnostics)
        : Error(what), exit_code_(exit_code), diagnostics_(std::move(diagnostics)) {}

    // -1 when the process did not exit normally or was never started.
    int exit_code() const noexcept { return exit_code_; }
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    int exit_code_;
    std::string diagnostics_;
};

class ObjectiveError : public Error {
public:
    using Error::Error;
};

class PretrainError : public Error {
public:
    using Error::Error;
};

class WorkflowError : public Error {
public:
    using Error::Error;
};

}  // namespace dradapt
