#ifndef MLMC_ERRORS_HPP
#define MLMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mlmc {

/// Invalid argument (dimension mismatch, nonpositive step, odd step count, ...).
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested an analytic/enumeration result outside its domain
/// (non-harmonic oracle, custom QoI, Gaussian enumeration, ...).
struct unsupported_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Estimator state not ready (e.g. variance read before two samples).
struct state_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// Work-budget exhausted (enumeration leaf budget).
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pilot statistics too weak to calibrate the bias model.
struct calibration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mlmc

#endif
