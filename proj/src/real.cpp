#include <lcx/real.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include <lcx/errors.hpp>

namespace lcx
{

std::string format_real(real x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

real parse_real(std::string_view s)
{
    if (s == "inf") {
        return inf;
    }
    if (s == "-inf") {
        return -inf;
    }
    real x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw invalid_input("malformed decimal string '" + std::string(s) + "'");
    }
    return x;
}

} // namespace lcx
