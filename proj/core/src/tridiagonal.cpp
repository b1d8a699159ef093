#include "dimer/tridiagonal.hpp"

#include "dimer/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dimer {

TridiagonalEigen eigen_tridiagonal(std::span<const double> diagonal, std::span<const double> off_diagonal,
                                   int max_iterations)
{
    const std::size_t n = diagonal.size();
    if (n == 0) {
        throw InvalidArgument("eigen_tridiagonal: empty matrix");
    }
    if (off_diagonal.size() + 1 != n) {
        throw InvalidArgument("eigen_tridiagonal: off-diagonal must have n - 1 entries");
    }
    std::vector<double> d(diagonal.begin(), diagonal.end());
    std::vector<double> e(n, 0.0);
    std::copy(off_diagonal.begin(), off_diagonal.end(), e.begin());

    // z holds eigenvectors as rows, so each Givens rotation updates two contiguous rows.
    std::vector<double> z(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        z[i * n + i] = 1.0;
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        for (;;) {
            std::size_t m = l;
            for (; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) {
                    break;
                }
            }
            if (m == l) {
                break;
            }
            if (iter++ == max_iterations) {
                throw ConvergenceFailure("eigen_tridiagonal: no convergence for eigenvalue " + std::to_string(l) +
                                             " after " + std::to_string(max_iterations) + " sweeps",
                                         l);
            }
            // Wilkinson-type shift from the leading 2x2 block.
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            bool deflated = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                double* zi = z.data() + i * n;
                double* zj = zi + n;
                for (std::size_t k = 0; k < n; ++k) {
                    f = zj[k];
                    zj[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if (deflated) {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    TridiagonalEigen out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = d[order[k]];
        const double* src = z.data() + order[k] * n;
        std::copy(src, src + n, out.vectors.data() + k * n);
    }
    return out;
}

} // namespace dimer
