#pragma once

#include <stdexcept>
#include <string>

namespace mcstop {

// Thrown when a trace is too short for the requested estimator
// (e.g. fewer than two batches, or an empty trace).
class insufficient_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when the data admit no meaningful estimate even though there is
// enough of it (all-equal trace, zero density at the quantile).
class degenerate_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mcstop
