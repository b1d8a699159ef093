#pragma once

#include "dimer/mat2.hpp"

#include <algorithm>
#include <cmath>

namespace dimer::test {

inline double rel_diff(const Mat2& a, const Mat2& b)
{
    const double scale = std::max({1.0, a.max_abs(), b.max_abs()});
    return max_abs_diff(a, b) / scale;
}

} // namespace dimer::test
