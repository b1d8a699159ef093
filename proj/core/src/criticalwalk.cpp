#include "dimer/criticalwalk.hpp"

#include "dimer/error.hpp"
#include "dimer/fit.hpp"
#include "dimer/parallel.hpp"
#include "dimer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dimer {

namespace {

int parity_sign(std::size_t j) noexcept { return j % 2 == 0 ? 1 : -1; }

void require_probability(double p, const char* where)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument(std::string(where) + ": p must lie in (0,1)");
    }
}

// Applies the leftward factor T_beta^j to sign * T_beta^u: T_beta^2 = -Id.
void absorb_beta_power(std::size_t j, int& sign, int& u)
{
    const std::size_t total = j + static_cast<std::size_t>(u);
    if ((total / 2) % 2 == 1) {
        sign = -sign;
    }
    u = static_cast<int>(total % 2);
}

} // namespace

const char* to_string(CriticalCouple c) noexcept
{
    switch (c) {
    case CriticalCouple::HalfSqrt2: return "HalfSqrt2";
    case CriticalCouple::Sqrt2: return "Sqrt2";
    }
    return "?";
}

CriticalCoupleAlgebra build_algebra(CriticalCouple couple, int sign_of_E)
{
    constexpr double r2 = std::numbers::sqrt2;
    CriticalCoupleAlgebra alg;
    alg.couple = couple;
    if (couple == CriticalCouple::Sqrt2) {
        alg.V = r2;
        alg.energy = 0.0;
        alg.x_alpha = alg.energy - alg.V;
        alg.x_beta = alg.energy + alg.V;
        alg.T_alpha = reduced_transfer(alg.x_alpha);
        alg.T_beta = reduced_transfer(alg.x_beta);
        alg.basis = Mat2::identity();
        alg.T_alpha_reduced = alg.T_alpha;
        alg.T_beta_reduced = alg.T_beta;
        // Eigenvalues of the hyperbolic pair product T_alpha T_beta.
        const SpectralClass pair = classify(alg.T_alpha * alg.T_beta);
        alg.lambda1 = pair.spectral_radius;
        alg.lambda2 = 1.0 / alg.lambda1;
        return alg;
    }

    alg.V = r2 / 2.0;
    alg.energy = (sign_of_E > 0 ? 3.0 : -3.0) / r2;
    const double alpha = alg.energy - alg.V;
    const double beta = alg.energy + alg.V;
    alg.roles_swapped = sign_of_E > 0;
    alg.x_alpha = alg.roles_swapped ? beta : alpha;
    alg.x_beta = alg.roles_swapped ? alpha : beta;
    alg.T_alpha = reduced_transfer(alg.x_alpha);
    alg.T_beta = reduced_transfer(alg.x_beta);

    const SpectralClass ca = classify(alg.T_alpha);
    alg.lambda1 = ca.spectral_radius;
    alg.lambda2 = 1.0 / alg.lambda1;

    // Eigenvector (x, 1) of T_X for eigenvalue l solves X x - 1 = l.
    const double x1 = (alg.lambda1 + 1.0) / alg.x_alpha;
    const double x2 = (alg.lambda2 + 1.0) / alg.x_alpha;
    Mat2 basis{x1, x2, 1.0, 1.0};
    Mat2 tb = basis.inverse() * alg.T_beta * basis;
    // Rescale the second eigenvector so the reduced T_beta reads [[0, 1-b], [1+b, 0]].
    const double scale = (1.0 - alg.x_beta) / tb.b;
    basis = Mat2{x1, scale * x2, 1.0, scale};
    const Mat2 binv = basis.inverse();
    const Mat2 ta = binv * alg.T_alpha * basis;
    tb = binv * alg.T_beta * basis;

    const double off_a = std::max(std::abs(ta.b), std::abs(ta.c)) / alg.lambda1;
    const double diag_b = std::max(std::abs(tb.a), std::abs(tb.d)) / tb.max_abs();
    if (off_a > 1e-12 || diag_b > 1e-12 || std::abs(ta.a - alg.lambda1) > 1e-12 * alg.lambda1) {
        throw Error("build_algebra: eigenbasis reduction lost its diagonal/antidiagonal structure");
    }
    alg.basis = basis;
    // Structural zeros are exact so that long products keep them exact.
    alg.T_alpha_reduced = Mat2::diag(alg.lambda1, alg.lambda2);
    alg.T_beta_reduced = Mat2{0.0, tb.b, tb.c, 0.0};
    return alg;
}

ReducedWord reduce_word(std::span<const Letter> word, const CriticalCoupleAlgebra& algebra)
{
    if (algebra.couple != CriticalCouple::HalfSqrt2) {
        throw InvalidArgument("reduce_word: requires the HalfSqrt2 algebra (use reduce_pairs for Sqrt2)");
    }
    // Applied order is right to left.
    auto it = word.rbegin();
    std::size_t leading = 0;
    while (it != word.rend() && *it == Letter::Beta) {
        ++leading;
        ++it;
    }
    ReducedWord out;
    while (it != word.rend()) {
        // One step: T_alpha followed by j factors T_beta.
        ++it;
        std::size_t j = 0;
        while (it != word.rend() && *it == Letter::Beta) {
            ++j;
            ++it;
        }
        out.V += out.u == 0 ? 1 : -1;
        absorb_beta_power(j, out.sign, out.u);
    }
    // Peeled leading factors: T_beta^u T_alpha^V T_beta^L.
    if (leading % 2 == 1) {
        out.V = -out.V;
        absorb_beta_power(1, out.sign, out.u);
    }
    if ((leading / 2) % 2 == 1) {
        out.sign = -out.sign;
    }
    return out;
}

Mat2 reconstruct(const ReducedWord& w, const CriticalCoupleAlgebra& algebra)
{
    const double log_l1 = std::log(algebra.lambda1);
    const double v = static_cast<double>(w.V);
    Mat2 m = Mat2::diag(std::exp(v * log_l1), std::exp(-v * log_l1));
    if (w.u == 1) {
        m = algebra.T_beta_reduced * m;
    }
    return static_cast<double>(w.sign) * m;
}

Mat2 direct_product(std::span<const Letter> word, const CriticalCoupleAlgebra& algebra, bool reduced)
{
    Mat2 m = Mat2::identity();
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        m = (reduced ? algebra.reduced(*it) : algebra.original(*it)) * m;
    }
    return m;
}

PairReduction reduce_pairs(std::span<const Letter> word, const CriticalCoupleAlgebra& algebra)
{
    if (algebra.couple != CriticalCouple::Sqrt2) {
        throw InvalidArgument("reduce_pairs: requires the Sqrt2 algebra");
    }
    PairReduction out;
    const std::size_t n = word.size();
    // Applied factor k (1-based) is word[n - k]; pair k covers T_{2k} T_{2k-1}.
    for (std::size_t k = 0; 2 * k + 2 <= n; ++k) {
        const Letter first = word[n - 1 - 2 * k];
        const Letter second = word[n - 2 - 2 * k];
        if (first == second) {
            out.sign = -out.sign;  // T_alpha^2 = T_beta^2 = -Id
        } else if (second == Letter::Alpha) {
            ++out.V;  // T_alpha T_beta
        } else {
            --out.V;  // T_beta T_alpha = (T_alpha T_beta)^{-1}
        }
    }
    if (n % 2 == 1) {
        out.trailing = word[0];
    }
    return out;
}

Mat2 reconstruct(const PairReduction& w, const CriticalCoupleAlgebra& algebra)
{
    Mat2 m = (algebra.T_alpha * algebra.T_beta).pow(w.V);
    if (w.trailing) {
        m = algebra.original(*w.trailing) * m;
    }
    return static_cast<double>(w.sign) * m;
}

StepPath step_path(std::span<const Letter> word)
{
    StepPath path;
    auto it = word.rbegin();
    while (it != word.rend() && *it == Letter::Beta) {
        ++path.leading_beta;
        ++it;
    }
    while (it != word.rend()) {
        ++it;
        std::size_t j = 0;
        while (it != word.rend() && *it == Letter::Beta) {
            ++j;
            ++it;
        }
        path.gaps.push_back(j);
    }
    const std::size_t m = path.gaps.size();
    path.eps.resize(m);
    path.U.assign(m + 1, 1);
    path.V.assign(m + 1, 0);
    path.u_recurrence.assign(m + 1, 1);
    int sign = 1;
    int u = 0;
    for (std::size_t k = 0; k < m; ++k) {
        path.eps[k] = parity_sign(path.gaps[k]);
        path.U[k + 1] = path.eps[k] * path.U[k];
        path.V[k + 1] = path.V[k] + (u == 0 ? 1 : -1);
        absorb_beta_power(path.gaps[k], sign, u);
        path.u_recurrence[k + 1] = u == 0 ? 1 : -1;
    }
    return path;
}

long long v_squared_expansion(const StepPath& path)
{
    const std::size_t m = path.eps.size();
    long long cross = 0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        long long prod = 1;
        for (std::size_t l = k + 1; l < m; ++l) {
            prod *= path.eps[l - 1];  // eps_l
            cross += prod;
        }
    }
    return static_cast<long long>(m) + 2 * cross;
}

NormBound check_norm_bound(const CriticalCoupleAlgebra& algebra, std::span<const Letter> word)
{
    if (word.empty()) {
        throw InvalidArgument("check_norm_bound: word must be nonempty");
    }
    const ReducedWord reduced = reduce_word(word, algebra);
    Mat2 m = Mat2::identity();
    double log_scale = 0.0;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        m = algebra.reduced(*it) * m;
        const double s = m.max_abs();
        m = (1.0 / s) * m;
        log_scale += std::log(s);
    }
    NormBound out;
    out.lhs = log_scale + std::log(m.norm());
    out.rhs = static_cast<double>(std::llabs(reduced.V)) * std::log(algebra.lambda1) +
              std::log(algebra.T_beta_reduced.norm());
    return out;
}

EpsilonLaw epsilon_law(double p)
{
    require_probability(p, "epsilon_law");
    return {1.0 / (1.0 + p), p / (1.0 + p), (1.0 - p) / (1.0 + p)};
}

ULaw u_law(double p, std::size_t k)
{
    require_probability(p, "u_law");
    if (k < 1) {
        throw InvalidArgument("u_law: k must be >= 1");
    }
    const double bias = std::pow((1.0 - p) / (1.0 + p), static_cast<double>(k));
    return {0.5 * (1.0 + bias), 0.5 * (1.0 - bias)};
}

Word random_word(std::size_t length, double p, std::uint64_t seed)
{
    RandomStream rng(seed);
    Word w(length);
    for (auto& l : w) {
        l = rng.bernoulli(p) ? Letter::Beta : Letter::Alpha;
    }
    return w;
}

const WalkStat& WalkStats::at(const std::string& name) const
{
    for (const auto& s : stats) {
        if (s.name == name) {
            return s;
        }
    }
    throw InvalidArgument("WalkStats: no statistic named " + name);
}

namespace {

struct TrialResult {
    std::size_t m = 0;
    std::size_t eps_plus = 0;   // complete gaps with even length
    std::size_t eps_count = 0;  // complete gaps
    std::vector<int> u_at;      // U_k at the requested k, 0 when unavailable
    std::vector<int> corr;      // U_1 U_{1+d}, d = 1..max_lag, 0 when unavailable
    long long v_final = 0;
    std::size_t pair_plus = 0;
    std::size_t pair_minus = 0;
    std::size_t pair_count = 0;
};

// Exact E(V_{m(n)}^2) for the HalfSqrt2 recurrence, by propagating the first
// two moments of V through the Markov chain on (started, u) over n raw draws.
double exact_v_squared_half_sqrt2(double p, std::size_t n)
{
    // States: 0 = before the first T_alpha, 1 = started with u = 0, 2 = started with u = 1.
    double prob[3] = {1.0, 0.0, 0.0};
    double s1[3] = {0.0, 0.0, 0.0};
    double s2[3] = {0.0, 0.0, 0.0};
    const double q = 1.0 - p;
    for (std::size_t t = 0; t < n; ++t) {
        double np[3] = {0.0, 0.0, 0.0};
        double n1[3] = {0.0, 0.0, 0.0};
        double n2[3] = {0.0, 0.0, 0.0};
        // T_beta: leading factors are peeled; afterwards u flips.
        np[0] += p * prob[0];
        n1[0] += p * s1[0];
        n2[0] += p * s2[0];
        np[2] += p * prob[1];
        n1[2] += p * s1[1];
        n2[2] += p * s2[1];
        np[1] += p * prob[2];
        n1[1] += p * s1[2];
        n2[1] += p * s2[2];
        // T_alpha: V += eps(u) and u is unchanged; the first one starts the walk with u = 0.
        const auto step = [&](int from, int to, double inc) {
            np[to] += q * prob[from];
            n1[to] += q * (s1[from] + inc * prob[from]);
            n2[to] += q * (s2[from] + 2.0 * inc * s1[from] + prob[from]);
        };
        step(0, 1, 1.0);
        step(1, 1, 1.0);
        step(2, 2, -1.0);
        for (int s = 0; s < 3; ++s) {
            prob[s] = np[s];
            s1[s] = n1[s];
            s2[s] = n2[s];
        }
    }
    return s2[0] + s2[1] + s2[2];
}

} // namespace

WalkStats simulate_walk(CriticalCouple couple, double p, std::size_t n_matrices, std::size_t n_trials,
                        std::uint64_t seed, const WalkOptions& options)
{
    require_probability(p, "simulate_walk");
    if (n_matrices < 1000) {
        throw InvalidArgument("simulate_walk: n_matrices must be >= 1000");
    }
    if (n_trials < 100) {
        throw InvalidArgument("simulate_walk: n_trials must be >= 100");
    }
    const std::size_t max_lag = options.max_lag;
    std::vector<TrialResult> trials(n_trials);

    parallel_for(
        n_trials,
        [&](std::size_t t) {
            const Word raw = random_word(n_matrices, p, derive_seed(seed, t));
            TrialResult& r = trials[t];
            r.m = static_cast<std::size_t>(std::count(raw.begin(), raw.end(), Letter::Alpha));
            if (couple == CriticalCouple::Sqrt2) {
                const std::size_t n = raw.size();
                long long v = 0;
                for (std::size_t k = 0; 2 * k + 2 <= n; ++k) {
                    const Letter first = raw[n - 1 - 2 * k];
                    const Letter second = raw[n - 2 - 2 * k];
                    ++r.pair_count;
                    if (first != second) {
                        if (second == Letter::Alpha) {
                            ++v;
                            ++r.pair_plus;
                        } else {
                            --v;
                            ++r.pair_minus;
                        }
                    }
                }
                r.v_final = v;
                return;
            }
            const StepPath path = step_path(raw);
            const std::size_t m = path.gaps.size();
            if (options.verify_identities) {
                for (std::size_t k = 0; k <= m; ++k) {
                    if (path.U[k] != path.u_recurrence[k]) {
                        throw Error("simulate_walk: U_k disagrees with the step recurrence");
                    }
                }
                const long long vm = path.V[m];
                if (vm * vm != v_squared_expansion(path)) {
                    throw Error("simulate_walk: V_m^2 expansion identity failed");
                }
            }
            // The last gap is cut by the end of the word; only complete
            // gaps j_0 .. j_{m-2} give eps_1 .. eps_{m-1}.
            const std::size_t complete = m > 0 ? m - 1 : 0;
            r.eps_count = complete;
            for (std::size_t k = 0; k < complete; ++k) {
                r.eps_plus += path.eps[k] == 1 ? 1 : 0;
            }
            r.u_at.assign(options.u_ks.size(), 0);
            for (std::size_t i = 0; i < options.u_ks.size(); ++i) {
                const std::size_t k = options.u_ks[i];
                if (k <= complete) {
                    r.u_at[i] = path.U[k];
                }
            }
            r.corr.assign(max_lag, 0);
            for (std::size_t d = 1; d <= max_lag; ++d) {
                if (1 + d <= complete) {
                    r.corr[d - 1] = path.U[1] * path.U[1 + d];
                }
            }
            r.v_final = path.V[m];
        },
        options.threads);

    WalkStats out;
    out.couple = couple;
    out.p = p;
    out.n_matrices = n_matrices;
    out.n_trials = n_trials;
    out.seed = seed;

    const double n = static_cast<double>(n_matrices);
    const double T = static_cast<double>(n_trials);
    const auto proportion = [](const std::string& name, double hits, double count, double theory) {
        return WalkStat{name, count > 0 ? hits / count : 0.0, theory,
                        count > 0 ? std::sqrt(theory * (1.0 - theory) / count) : 0.0};
    };

    std::vector<double> m_values(n_trials);
    std::vector<double> v2_values(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) {
        m_values[t] = static_cast<double>(trials[t].m);
        v2_values[t] = static_cast<double>(trials[t].v_final) * static_cast<double>(trials[t].v_final);
    }
    // m(n) ~ Binomial(n, 1 - p).
    const double var_m = p * (1.0 - p) * n;
    const double mu4 = var_m * (1.0 + 3.0 * (n - 2.0) * p * (1.0 - p));
    out.stats.push_back({"E(m)", mean(m_values), (1.0 - p) * n, std::sqrt(var_m / T)});
    out.stats.push_back({"Var(m)", sample_variance(m_values), var_m,
                         std::sqrt((mu4 - var_m * var_m * (T - 3.0) / (T - 1.0)) / T)});

    if (couple == CriticalCouple::Sqrt2) {
        double plus = 0.0;
        double minus = 0.0;
        double count = 0.0;
        for (const auto& r : trials) {
            plus += static_cast<double>(r.pair_plus);
            minus += static_cast<double>(r.pair_minus);
            count += static_cast<double>(r.pair_count);
        }
        const double step = p * (1.0 - p);
        out.stats.push_back(proportion("P(dV=+1)", plus, count, step));
        out.stats.push_back(proportion("P(dV=-1)", minus, count, step));
        out.stats.push_back(proportion("P(dV=0)", count - plus - minus, count, p * p + (1.0 - p) * (1.0 - p)));
        const double pairs = std::floor(n / 2.0);
        out.stats.push_back({"E(V_n^2)", mean(v2_values), 2.0 * pairs * p * (1.0 - p),
                             std::sqrt(sample_variance(v2_values) / T)});
        return out;
    }

    const EpsilonLaw eps = epsilon_law(p);
    double eps_plus = 0.0;
    double eps_count = 0.0;
    for (const auto& r : trials) {
        eps_plus += static_cast<double>(r.eps_plus);
        eps_count += static_cast<double>(r.eps_count);
    }
    out.stats.push_back(proportion("P(eps=+1)", eps_plus, eps_count, eps.p_plus));
    out.stats.push_back(proportion("P(eps=-1)", eps_count - eps_plus, eps_count, eps.p_minus));
    out.stats.push_back({"E(eps)", (2.0 * eps_plus - eps_count) / eps_count, eps.mean,
                         std::sqrt((1.0 - eps.mean * eps.mean) / eps_count)});

    for (std::size_t i = 0; i < options.u_ks.size(); ++i) {
        const std::size_t k = options.u_ks[i];
        double hits = 0.0;
        double count = 0.0;
        for (const auto& r : trials) {
            if (r.u_at[i] != 0) {
                count += 1.0;
                hits += r.u_at[i] == 1 ? 1.0 : 0.0;
            }
        }
        out.stats.push_back(proportion("P(U_" + std::to_string(k) + "=+1)", hits, count, u_law(p, k).p_plus));
    }
    for (std::size_t d = 1; d <= max_lag; ++d) {
        double sum = 0.0;
        double count = 0.0;
        for (const auto& r : trials) {
            if (r.corr[d - 1] != 0) {
                count += 1.0;
                sum += r.corr[d - 1];
            }
        }
        const double theory = std::pow(eps.mean, static_cast<double>(d));
        out.stats.push_back({"E(U_1 U_" + std::to_string(1 + d) + ")", count > 0 ? sum / count : 0.0, theory,
                             count > 0 ? std::sqrt((1.0 - theory * theory) / count) : 0.0});
    }
    out.stats.push_back({"E(V_m^2)", mean(v2_values), exact_v_squared_half_sqrt2(p, n_matrices),
                         std::sqrt(sample_variance(v2_values) / T)});
    return out;
}

} // namespace dimer
