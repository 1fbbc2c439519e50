#pragma once

#include <functional>
#include <string>

#include <lcx/errors.hpp>
#include <lcx/real.hpp>

namespace lcx::detail
{

struct halving_result {
    real value = 1;
    int checked = 0;
};

// Halves c from 1 until accept(c) holds. Powers of two with
// c * skip_ratio >= 1 are skipped without calling accept: the caller passes
// the largest attained lower bound over eps, so those steps are provably
// rejected. Only calls to accept count towards max_checked.
inline halving_result halve_until(real skip_ratio, const std::function<bool(real)> &accept, int max_checked,
                                  const std::string &what)
{
    halving_result res;
    constexpr real guard = 1 + 1e-12L;
    while (res.value * skip_ratio >= guard) {
        res.value /= 2;
        if (res.value == 0) {
            throw undecided_error("no admissible " + what + " above the underflow threshold");
        }
    }
    while (true) {
        if (res.checked >= max_checked) {
            throw undecided_error("no admissible " + what + " within the halving cap");
        }
        ++res.checked;
        if (accept(res.value)) {
            return res;
        }
        res.value /= 2;
    }
}

} // namespace lcx::detail
