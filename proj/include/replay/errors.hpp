// Error hierarchy shared by all modules. The CLI maps these onto exit
// codes: ConfigError -> 1, DataError -> 2, NumericError -> 3.

#pragma once

#include <stdexcept>
#include <string>

namespace replay {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration: invalid keys, invalid flag combinations, shape
/// mismatches between a checkpoint and the configured model.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bad input data: malformed rows, out-of-range ids or coordinates,
/// empty corpora where content is required.
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during training or optimization (non-finite loss
/// or gradients).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Shape mismatch in dense linear algebra.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A loss function handed to the gradient checker returned different
/// values for identical parameters.
class DeterminismError : public Error {
public:
    using Error::Error;
};

}  // namespace replay
