#pragma once

#include "dimer/mat2.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dimer {

/// The two parameter couples where the Lyapunov exponent vanishes through
/// cancellations in the random product rather than through resonance.
enum class CriticalCouple {
    HalfSqrt2,  ///< V = 1/sqrt(2), E = +-3/sqrt(2)
    Sqrt2,      ///< V = sqrt(2), E = 0
};

const char* to_string(CriticalCouple c) noexcept;

enum class Letter : unsigned char { Alpha, Beta };

/// A product of T_alpha / T_beta factors, stored most-recent-first:
/// word[0] is the leftmost factor of T_n ... T_1.
using Word = std::vector<Letter>;

/// Transfer-matrix algebra at a critical couple.
///
/// "alpha" and "beta" name roles, not the physical potentials. For HalfSqrt2
/// T_alpha is the hyperbolic generator (X = 2 beta_X) and T_beta the elliptic
/// one with X^2 = 2; for E < 0 that is T^E_V and T^E_{-V}, for E > 0 the roles
/// are swapped. For Sqrt2, T_alpha = T^0_V and T_beta = T^0_{-V}.
struct CriticalCoupleAlgebra {
    CriticalCouple couple = CriticalCouple::HalfSqrt2;
    double V = 0.0;
    double energy = 0.0;
    double x_alpha = 0.0;  ///< T_alpha = reduced_transfer(x_alpha)
    double x_beta = 0.0;
    bool roles_swapped = false;  ///< true when T_alpha carries the -V potential

    Mat2 T_alpha;  ///< original basis
    Mat2 T_beta;
    Mat2 basis;  ///< columns are the eigenvectors of T_alpha (identity for Sqrt2)
    Mat2 T_alpha_reduced;
    Mat2 T_beta_reduced;
    double lambda1 = 1.0;  ///< HalfSqrt2: eigenvalues of T_alpha, lambda1 > 1
    double lambda2 = 1.0;

    const Mat2& reduced(Letter l) const noexcept { return l == Letter::Alpha ? T_alpha_reduced : T_beta_reduced; }
    const Mat2& original(Letter l) const noexcept { return l == Letter::Alpha ? T_alpha : T_beta; }
};

/// sign_of_E selects E = +3/sqrt(2) (> 0) or E = -3/sqrt(2) (< 0) for HalfSqrt2; ignored for Sqrt2.
CriticalCoupleAlgebra build_algebra(CriticalCouple couple, int sign_of_E = -1);

/// sign * T_beta^u * T_alpha^V.
struct ReducedWord {
    int sign = 1;
    int u = 0;
    long long V = 0;
    friend bool operator==(const ReducedWord&, const ReducedWord&) = default;
};

/// Symbolic reduction of a HalfSqrt2 word by the integer step recurrence
/// V_{k+1} = V_k + eps(u_k), eps(u_{k+1}) = eps(j_k) eps(u_k), with sign
/// bookkeeping from T_beta^2 = -Id and T_alpha^n T_beta = T_beta T_alpha^{-n}.
ReducedWord reduce_word(std::span<const Letter> word, const CriticalCoupleAlgebra& algebra);

/// sign * T_beta_reduced^u * diag(lambda1^V, lambda2^V), powers taken in log space.
Mat2 reconstruct(const ReducedWord& w, const CriticalCoupleAlgebra& algebra);

/// Product of the factors by explicit multiplication, in the eigenbasis or the original basis.
Mat2 direct_product(std::span<const Letter> word, const CriticalCoupleAlgebra& algebra, bool reduced = true);

/// Sqrt2 reduction: T_n...T_1 = sign * (T_alpha T_beta)^V, times the
/// unpaired leftmost factor when the word has odd length.
struct PairReduction {
    int sign = 1;
    long long V = 0;
    std::optional<Letter> trailing;
};

PairReduction reduce_pairs(std::span<const Letter> word, const CriticalCoupleAlgebra& algebra);
Mat2 reconstruct(const PairReduction& w, const CriticalCoupleAlgebra& algebra);

/// Step decomposition of a HalfSqrt2 word after the leading T_beta factors
/// are peeled: steps are T_beta^{j_i} T_alpha, i = 0..m-1, in applied order.
struct StepPath {
    std::size_t leading_beta = 0;
    std::vector<std::size_t> gaps;   ///< j_0 .. j_{m-1}; the last one may be truncated by the word end
    std::vector<int> eps;            ///< eps_k = (-1)^{j_{k-1}}, k = 1..m (eps[k-1])
    std::vector<int> U;              ///< U_k = eps_k ... eps_1, k = 0..m (U[0] = 1)
    std::vector<long long> V;        ///< V_k, k = 0..m, via the recurrence
    std::vector<int> u_recurrence;   ///< eps(u_k) from the recurrence, k = 0..m
};

StepPath step_path(std::span<const Letter> word);

/// Right-hand side of V_m^2 = m + 2 sum_{0<=k<l<=m-1} eps_{k+1}...eps_l
/// evaluated directly from the eps sequence of a path.
long long v_squared_expansion(const StepPath& path);

struct NormBound {
    double lhs = 0.0;  ///< ln ||T_n...T_1|| in the eigenbasis
    double rhs = 0.0;  ///< |V| ln lambda1 + ln ||T_beta||
};

/// HalfSqrt2 only; word nonempty.
NormBound check_norm_bound(const CriticalCoupleAlgebra& algebra, std::span<const Letter> word);

struct EpsilonLaw {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double mean = 0.0;
};

/// (1/(1+p), p/(1+p), (1-p)/(1+p)); requires 0 < p < 1.
EpsilonLaw epsilon_law(double p);

struct ULaw {
    double p_plus = 0.0;
    double p_minus = 0.0;
};

/// P(U_k = +-1) = (1 +- ((1-p)/(1+p))^k) / 2; requires 0 < p < 1, k >= 1.
ULaw u_law(double p, std::size_t k);

/// Random word of the given length with P(T_beta) = p per factor.
Word random_word(std::size_t length, double p, std::uint64_t seed);

struct WalkStat {
    std::string name;
    double empirical = 0.0;
    double theoretical = 0.0;
    double sigma = 0.0;  ///< standard deviation of the empirical estimator

    double z_score() const noexcept { return sigma > 0.0 ? (empirical - theoretical) / sigma : 0.0; }
};

struct WalkStats {
    CriticalCouple couple = CriticalCouple::HalfSqrt2;
    double p = 0.0;
    std::size_t n_matrices = 0;
    std::size_t n_trials = 0;
    std::uint64_t seed = 0;
    std::vector<WalkStat> stats;

    /// Throws InvalidArgument when the statistic is absent.
    const WalkStat& at(const std::string& name) const;
};

struct WalkOptions {
    std::vector<std::size_t> u_ks{1, 2, 5, 10};
    std::size_t max_lag = 5;
    /// Check the V_m^2 expansion and the U/eps recurrence identity on every path.
    bool verify_identities = true;
    unsigned threads = 0;
};

/// Monte Carlo over n_trials independent raw sequences of n_matrices factors
/// (T_alpha with probability 1 - p, T_beta with probability p). Throws
/// Error if a per-path exact identity fails (only when verify_identities).
WalkStats simulate_walk(CriticalCouple couple, double p, std::size_t n_matrices, std::size_t n_trials,
                        std::uint64_t seed, const WalkOptions& options = {});

} // namespace dimer
