#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dimer {

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
struct TridiagonalEigen {
    std::size_t n = 0;
    std::vector<double> values;   ///< ascending
    std::vector<double> vectors;  ///< row k (length n) is the unit eigenvector of values[k]

    std::span<const double> vector(std::size_t k) const { return {vectors.data() + k * n, n}; }
};

/// Implicit-shift QL iteration. `diagonal` has n entries and `off_diagonal`
/// n - 1. Throws ConvergenceFailure (with the eigenvalue index) if one
/// eigenvalue needs more than max_iterations sweeps.
TridiagonalEigen eigen_tridiagonal(std::span<const double> diagonal, std::span<const double> off_diagonal,
                                   int max_iterations = 60);

} // namespace dimer
