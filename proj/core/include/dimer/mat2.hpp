#pragma once

#include <cmath>
#include <numbers>

namespace dimer {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const noexcept { return std::hypot(x, y); }
};

/// Real 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    static constexpr Mat2 identity() noexcept { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double x, double y) noexcept { return {x, 0.0, 0.0, y}; }

    constexpr double det() const noexcept { return a * d - b * c; }
    constexpr double trace() const noexcept { return a + d; }

    /// Inverse assuming det = 1, computed exactly as [[d, -b], [-c, a]].
    constexpr Mat2 unimodular_inverse() const noexcept { return {d, -b, -c, a}; }
    Mat2 inverse() const;

    /// Operator 2-norm (largest singular value).
    double norm() const noexcept;
    double max_abs() const noexcept;

    /// Integer power; negative exponents use the unimodular inverse.
    Mat2 pow(long long n) const;

    constexpr Vec2 operator*(Vec2 v) const noexcept { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) noexcept
    {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& m) noexcept
    {
        return {s * m.a, s * m.b, s * m.c, s * m.d};
    }
    friend constexpr Mat2 operator+(const Mat2& m, const Mat2& n) noexcept
    {
        return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
    }
    friend constexpr Mat2 operator-(const Mat2& m, const Mat2& n) noexcept
    {
        return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
    }
    constexpr Mat2 operator-() const noexcept { return {-a, -b, -c, -d}; }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// Largest entrywise absolute difference.
double max_abs_diff(const Mat2& m, const Mat2& n) noexcept;

enum class SpectralKind { Elliptic, Parabolic, Hyperbolic };

const char* to_string(SpectralKind kind) noexcept;

struct SpectralClass {
    SpectralKind kind = SpectralKind::Elliptic;
    double trace = 0.0;
    double spectral_radius = 1.0;
};

inline constexpr double kTraceTolerance = 1e-9;
inline constexpr double kUnimodularTolerance = 1e-9;

/// Elliptic / parabolic / hyperbolic split by |trace| against 2 with band
/// kTraceTolerance. Throws NotUnimodular when |det - 1| > kUnimodularTolerance.
SpectralClass classify(const Mat2& m);

/// A line through the origin, stored as its angle in [0, pi).
class Direction {
public:
    static constexpr double kTolerance = 1e-10;

    Direction() = default;
    explicit Direction(double theta) noexcept;
    static Direction of(Vec2 v) noexcept;

    double theta() const noexcept { return theta_; }
    Vec2 unit() const noexcept { return {std::cos(theta_), std::sin(theta_)}; }

    /// Angular distance on the projective line, in [0, pi/2].
    double distance(Direction other) const noexcept;

    friend bool operator==(Direction l, Direction r) noexcept { return l.distance(r) <= kTolerance; }

private:
    double theta_ = 0.0;
};

/// Projective (homography) action of m on a direction. Throws Singular when |det m| < 1e-12.
Direction act(const Mat2& m, Direction x);

/// S^E_v = [[E - v, -1], [1, 0]].
constexpr Mat2 one_step_transfer(double energy, double v) noexcept
{
    return {energy - v, -1.0, 1.0, 0.0};
}

/// T^E_v = (S^E_v)^2 in closed form.
constexpr Mat2 two_step_transfer(double energy, double v) noexcept
{
    const double x = energy - v;
    return {x * x - 1.0, -x, x, -1.0};
}

/// T_X = two_step_transfer with E - v = X.
constexpr Mat2 reduced_transfer(double x) noexcept { return two_step_transfer(x, 0.0); }

/// tr(T_X^2) by explicit multiplication; equals X^4 - 4X^2 + 2.
double power_trace_check(double x) noexcept;

} // namespace dimer
