#pragma once

#include <stdexcept>
#include <string>

namespace panelsde {

// Base class for all library errors. The CLI maps Error subclasses to
// exit code 2 (input/usage) or 3 (numerical) depending on the type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- numerical errors (CLI exit code 3) ---

class NumericalError : public Error {
public:
    using Error::Error;
};

class SymmetryError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotPsdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateCovarianceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ModelEvalError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateKdeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateWeightsError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateSeriesError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// --- input/usage errors (CLI exit code 2) ---

class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class DuplicateKeyError : public InputError {
public:
    using InputError::InputError;
};

class SchemaError : public InputError {
public:
    using InputError::InputError;
};

class InsufficientDataError : public InputError {
public:
    using InputError::InputError;
};

class DegenerateColumnError : public InputError {
public:
    using InputError::InputError;
};

class ShapeError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace panelsde
