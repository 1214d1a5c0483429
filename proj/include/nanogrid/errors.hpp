#pragma once

#include <stdexcept>
#include <string>

namespace nanogrid {

// Error taxonomy. The CLI maps each family onto an exit code
// (config 2, data 3, model/infeasibility 4).

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or parameter value supplied by the caller.
class ParameterError : public Error {
public:
    using Error::Error;
};

class ConfigError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Input data that cannot be ingested or fails validation.
class DataError : public Error {
public:
    using Error::Error;
};

class IngestionError : public DataError {
public:
    using DataError::DataError;
};

class GapError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

/// Model-level failures: broken preconditions on state transitions,
/// infeasible EV sessions, unusable forecast models.
class ModelError : public Error {
public:
    using Error::Error;
};

class ContractError : public ModelError {
public:
    using ModelError::ModelError;
};

class BoundsError : public ModelError {
public:
    using ModelError::ModelError;
};

class InfeasibleError : public ModelError {
public:
    using ModelError::ModelError;
};

}  // namespace nanogrid
