#pragma once

#include <limits>
#include <string>
#include <string_view>

namespace lcx
{

// Working precision for every series, bracket and certificate quantity.
// Extended precision is needed for its exponent range: witness parameters
// such as m^k0 routinely exceed 1e308.
using real = long double;

inline constexpr real pi = 3.141592653589793238462643383279502884L;
inline constexpr real inf = std::numeric_limits<real>::infinity();

// Shortest decimal string that parses back to the same value.
std::string format_real(real x);

// Inverse of format_real; throws invalid_input on malformed text.
real parse_real(std::string_view s);

} // namespace lcx
