#include "dimer/mat2.hpp"

#include "dimer/error.hpp"

#include <algorithm>
#include <string>

namespace dimer {

Mat2 Mat2::inverse() const
{
    const double dt = det();
    if (std::abs(dt) < 1e-12) {
        throw Singular("Mat2::inverse: determinant " + std::to_string(dt) + " is numerically zero");
    }
    return (1.0 / dt) * Mat2{d, -b, -c, a};
}

double Mat2::norm() const noexcept
{
    // Singular values of a 2x2 matrix are q +- r.
    const double q = 0.5 * std::hypot(a + d, c - b);
    const double r = 0.5 * std::hypot(a - d, b + c);
    return q + r;
}

double Mat2::max_abs() const noexcept
{
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
}

Mat2 Mat2::pow(long long n) const
{
    Mat2 base = *this;
    if (n < 0) {
        base = std::abs(det() - 1.0) <= kUnimodularTolerance ? unimodular_inverse() : inverse();
        n = -n;
    }
    if (n <= 32) {
        Mat2 out = identity();
        for (long long i = 0; i < n; ++i) {
            out = base * out;
        }
        return out;
    }
    Mat2 out = identity();
    while (n > 0) {
        if (n & 1) {
            out = out * base;
        }
        base = base * base;
        n >>= 1;
    }
    return out;
}

double max_abs_diff(const Mat2& m, const Mat2& n) noexcept
{
    return (m - n).max_abs();
}

const char* to_string(SpectralKind kind) noexcept
{
    switch (kind) {
    case SpectralKind::Elliptic: return "Elliptic";
    case SpectralKind::Parabolic: return "Parabolic";
    case SpectralKind::Hyperbolic: return "Hyperbolic";
    }
    return "?";
}

SpectralClass classify(const Mat2& m)
{
    const double dt = m.det();
    if (!(std::abs(dt - 1.0) <= kUnimodularTolerance)) {
        throw NotUnimodular("classify: |det - 1| = " + std::to_string(std::abs(dt - 1.0)) +
                            " exceeds " + std::to_string(kUnimodularTolerance));
    }
    SpectralClass out;
    out.trace = m.trace();
    const double t = std::abs(out.trace);
    if (std::abs(t - 2.0) <= kTraceTolerance) {
        out.kind = SpectralKind::Parabolic;
        out.spectral_radius = 1.0;
    } else if (t < 2.0) {
        out.kind = SpectralKind::Elliptic;
        out.spectral_radius = 1.0;
    } else {
        out.kind = SpectralKind::Hyperbolic;
        out.spectral_radius = 0.5 * (t + std::sqrt(t * t - 4.0));
    }
    return out;
}

Direction::Direction(double theta) noexcept
{
    constexpr double pi = std::numbers::pi;
    double r = std::fmod(theta, pi);
    if (r < 0.0) {
        r += pi;
    }
    if (r >= pi) {
        r = 0.0;
    }
    theta_ = r;
}

Direction Direction::of(Vec2 v) noexcept
{
    return Direction(std::atan2(v.y, v.x));
}

double Direction::distance(Direction other) const noexcept
{
    const double delta = std::abs(theta_ - other.theta_);
    return std::min(delta, std::numbers::pi - delta);
}

Direction act(const Mat2& m, Direction x)
{
    if (std::abs(m.det()) < 1e-12) {
        throw Singular("act: matrix is singular (|det| < 1e-12)");
    }
    return Direction::of(m * x.unit());
}

double power_trace_check(double x) noexcept
{
    const Mat2 t = reduced_transfer(x);
    return (t * t).trace();
}

} // namespace dimer
