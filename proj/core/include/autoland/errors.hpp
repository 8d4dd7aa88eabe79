#pragma once

#include <stdexcept>
#include <string>

namespace autoland {

/// Base class for all autoland errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Euler-rate conversion or rotation decomposition requested too close to
/// the pitch singularity.
struct GimbalLock : Error {
    using Error::Error;
};

struct BehindCamera : Error {
    using Error::Error;
};

struct NoDetections : Error {
    using Error::Error;
};

struct EmptyBounds : Error {
    using Error::Error;
};

struct OutOfDomain : Error {
    using Error::Error;
};

struct DegenerateRequest : Error {
    using Error::Error;
};

struct NoPath : Error {
    using Error::Error;
};

struct StartOccupied : Error {
    using Error::Error;
};

struct GoalOccupied : Error {
    using Error::Error;
};

/// Scenario configuration failed validation. Message carries the JSON
/// field path of the offending value.
struct ConfigInvalid : Error {
    using Error::Error;
};

struct EmptyLog : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// Simulation state became non-finite.
struct SimulationDiverged : Error {
    using Error::Error;
};

}  // namespace autoland
