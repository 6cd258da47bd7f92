#pragma once

#include <stdexcept>
#include <string>

namespace qcrb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Invalid state or model data (non-PSD state, dependent derivatives, ...).
struct InvalidStateError : Error {
    using Error::Error;
};

struct SolverFailure : Error {
    using Error::Error;
};

}  // namespace qcrb
