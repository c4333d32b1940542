#pragma once

#include <stdexcept>
#include <string>

namespace stvsi {

/// Base class for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// CSV input could not be parsed (bad header, bad row, non-finite or negative voltage).
struct MalformedCsv : Error {
    using Error::Error;
};

/// Successive time deltas deviate from the median interval by more than the tolerance.
struct NonUniformSampling : Error {
    using Error::Error;
};

/// Input shorter than the operation's minimum length.
struct TooShort : Error {
    using Error::Error;
};

/// No sample dipped below the detection threshold, or no recovery slope followed.
struct NoFaultDetected : Error {
    using Error::Error;
};

/// Requested analysis window extends past the end of the trajectory.
struct WindowOutOfRange : Error {
    using Error::Error;
};

/// Fewer extrema than an envelope fit requires.
struct InsufficientExtrema : Error {
    using Error::Error;
};

/// Two distributions were combined but their bin grids differ.
struct GridMismatch : Error {
    using Error::Error;
};

/// Scenario parameters violate the generator's preconditions.
struct InvalidSpec : Error {
    using Error::Error;
};

/// No gamma in the search range brings the boundary-pair indices within epsilon.
struct NoFeasibleGamma : Error {
    using Error::Error;
};

/// Batch assessment called with an empty input list.
struct EmptyBatch : Error {
    using Error::Error;
};

}  // namespace stvsi
