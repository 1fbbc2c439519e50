#pragma once

#include <stdexcept>
#include <string>

namespace lcx
{

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed user input: bad spec parameters, schema violations, overlapping patches.
struct invalid_input : error {
    using error::error;
};

struct dimension_error : error {
    using error::error;
};

// Point outside the domain of a primitive (tangent stretch off (-1,1), 1/0).
struct domain_error : error {
    using error::error;
};

// Requested jet order exceeds the configured cap.
struct capability_error : error {
    using error::error;
};

// A function is not supported where an operation requires it to be.
struct support_error : error {
    using error::error;
};

// A bracket search could not separate a quantity from its threshold.
struct undecided_error : error {
    using error::error;
};

} // namespace lcx
