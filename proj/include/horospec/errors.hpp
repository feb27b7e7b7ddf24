#pragma once

#include <stdexcept>
#include <string>

namespace horospec {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// argument outside a documented validity range (e.g. |s| > 700 in the
// geodesic subgroup, FD step outside [1e-4, 1e-1])
struct range_error : error {
    using error::error;
};

// Mobius action with |cz+d| below representable scale
struct degenerate_action_error : error {
    using error::error;
};

// group construction failed its defining relation check
struct construction_error : error {
    using error::error;
};

// greedy fundamental-domain descent did not terminate (corrupted representative)
struct reduction_failure : error {
    using error::error;
};

// adaptive ODE step underflow; signals a bad speed function
struct stiffness_error : error {
    using error::error;
};

// two independent evaluation routes of the same operator disagree
struct numerical_differentiation_error : error {
    using error::error;
};

// requested truncation / tolerance / parameter combination is unachievable
struct config_error : error {
    using error::error;
};

// slice rectification grid too coarse for the requested accuracy
struct resolution_error : error {
    using error::error;
};

// operation precondition violated (documented per operation)
struct precondition_error : error {
    using error::error;
};

// spectrally filtered state has no mass in the requested window
struct empty_projection_error : error {
    using error::error;
};

} // namespace horospec
