#pragma once

// Asymptotic laws of the extrema of a standard Brownian bridge U on [0,1]:
//
//   M+ = max U,  M- = -min U,  M = max(M+,M-),  m = min(M+,M-),
//   K  = M+ + M-   (the Kuiper statistic),  Q = M+ / M-.
//
// All CDFs/tails here are theta-like series with Gaussian-decay terms, plus
// two exact elementary formulas (one-sided tail, quotient CDF).  Every series
// is truncated with a certified remainder bound: alternating series use the
// next-term bound, positive/mixed-sign series a geometric majorant.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bridge_extrema/accuracy.hpp"

namespace bridge_extrema {

struct ExtremaMoments {
    double mean_mplus;  // E(M+) = sqrt(2*pi)/4
    double var_mplus;   // var(M+) = 1/2 - pi/8
    double e_product;   // E(M+ M-) = pi^2/12 - 1/2
    double cov;         // cov(M+,M-) = pi^2/12 - 1/2 - pi/8
    double corr;        // cov / var
};

namespace detail {

inline void require_nonneg(double x, const char* who) {
    if (!(x >= 0.0)) throw std::domain_error(std::string(who) + ": argument must be >= 0");
}

inline void cap_check(bool converged, const char* who, double best, double bound) {
    if (!converged)
        throw accuracy_error(std::string(who) + ": term cap hit before tolerance", best, bound);
}

}  // namespace detail

// P(M+ >= x) = exp(-2 x^2).  Reflection principle; exact, no truncation.
inline double one_sided_tail(double x) {
    detail::require_nonneg(x, "one_sided_tail");
    return std::exp(-2.0 * x * x);
}

// F_M(z) = sum_{n in Z} (-1)^n exp(-2 n^2 z^2), the Kolmogorov limit law.
// Folded to 1 + 2 sum_{n>=1} (-1)^n q^(n^2); alternating with strictly
// decreasing terms, so the remainder is below the first omitted term.
inline double ks_cdf(double z, const Accuracy& acc = {}, double* trunc_bound = nullptr) {
    detail::require_nonneg(z, "ks_cdf");
    if (z == 0.0) {  // series does not converge pointwise; M > 0 a.s.
        if (trunc_bound) *trunc_bound = 0.0;
        return 0.0;
    }
    double sum = 1.0;
    double sign = -1.0;
    double bound = 2.0 * std::exp(-2.0 * z * z);
    bool converged = false;
    for (int n = 1; n <= acc.max_terms; ++n) {
        const double term = 2.0 * std::exp(-2.0 * n * n * z * z);
        sum += sign * term;
        sign = -sign;
        bound = 2.0 * std::exp(-2.0 * (n + 1.0) * (n + 1.0) * z * z);
        if (bound <= acc.abs_tol) {
            converged = true;
            break;
        }
    }
    detail::cap_check(converged, "ks_cdf", sum, bound);
    if (trunc_bound) *trunc_bound = bound;
    return detail::clamp_prob(sum, acc.abs_tol + bound, "ks_cdf");
}

// P(m > z) = 2 sum_{n>=2} (-1)^n exp(-2 n^2 z^2) for the smaller extremum
// m = min(M+,M-).  Alternating with decreasing terms from n = 2 on.
inline double min_extremum_tail(double z, const Accuracy& acc = {}, double* trunc_bound = nullptr) {
    detail::require_nonneg(z, "min_extremum_tail");
    if (z == 0.0) {  // m > 0 a.s.
        if (trunc_bound) *trunc_bound = 0.0;
        return 1.0;
    }
    double sum = 0.0;
    double sign = 1.0;
    double bound = 2.0 * std::exp(-8.0 * z * z);
    bool converged = false;
    for (int n = 2; n <= acc.max_terms + 1; ++n) {
        const double term = 2.0 * std::exp(-2.0 * n * n * z * z);
        sum += sign * term;
        sign = -sign;
        bound = 2.0 * std::exp(-2.0 * (n + 1.0) * (n + 1.0) * z * z);
        if (bound <= acc.abs_tol) {
            converged = true;
            break;
        }
    }
    detail::cap_check(converged, "min_extremum_tail", sum, bound);
    if (trunc_bound) *trunc_bound = bound;
    return detail::clamp_prob(sum, acc.abs_tol + bound, "min_extremum_tail");
}

namespace detail {

// sum_{k in Z} exp(-2 (k s + z)^2), folded over +-k.  Positive terms with
// ratio below exp(-2 s ((2k+1) s - 2z)) < 1 for 0 <= z < s, which decreases
// in k, so the tail is bounded by the next pair over (1 - ratio).
inline double gaussian_comb(double s, double z, const Accuracy& acc, double tol, double& bound,
                            const char* who) {
    double sum = std::exp(-2.0 * z * z);
    bool converged = false;
    bound = 0.0;
    for (int k = 1; k <= acc.max_terms; ++k) {
        const double a = k * s + z;
        const double b = k * s - z;
        const double pair = std::exp(-2.0 * a * a) + std::exp(-2.0 * b * b);
        sum += pair;
        const double a1 = (k + 1.0) * s + z;
        const double b1 = (k + 1.0) * s - z;
        const double next = std::exp(-2.0 * a1 * a1) + std::exp(-2.0 * b1 * b1);
        const double ratio = std::exp(-2.0 * s * ((2.0 * k + 3.0) * s - 2.0 * z));
        if (ratio < 1.0) {
            bound = next / (1.0 - ratio);
            if (bound <= tol) {
                converged = true;
                break;
            }
        }
    }
    cap_check(converged, who, sum, bound);
    return sum;
}

}  // namespace detail

// P(M+ <= z, M- <= w) = sum_k exp(-2 k^2 (z+w)^2) - sum_k exp(-2 (k(z+w)+z)^2)
// (the classical double-boundary crossing series for the bridge).
inline double joint_cdf(double z, double w, const Accuracy& acc = {},
                        double* trunc_bound = nullptr) {
    detail::require_nonneg(z, "joint_cdf");
    detail::require_nonneg(w, "joint_cdf");
    if (z == 0.0 || w == 0.0) {  // each side is hit arbitrarily close to 0 a.s.
        if (trunc_bound) *trunc_bound = 0.0;
        return 0.0;
    }
    const double s = z + w;
    double bound_a = 0.0, bound_b = 0.0;
    const double a = detail::gaussian_comb(s, 0.0, acc, acc.abs_tol / 2.0, bound_a, "joint_cdf");
    const double b = detail::gaussian_comb(s, z, acc, acc.abs_tol / 2.0, bound_b, "joint_cdf");
    const double bound = bound_a + bound_b;
    if (trunc_bound) *trunc_bound = bound;
    return detail::clamp_prob(a - b, acc.abs_tol + bound, "joint_cdf");
}

// F_K(x) = sum_{k in Z} (1 - 4 k^2 x^2) exp(-2 k^2 x^2) for K = M+ + M-.
// Mixed-sign terms; majorized by (1 + 4 k^2 x^2) exp(-2 k^2 x^2), whose term
// ratio is below ((k+1)/k)^2 exp(-2 (2k+1) x^2) and decreasing.
inline double kuiper_cdf(double x, const Accuracy& acc = {}, double* trunc_bound = nullptr) {
    detail::require_nonneg(x, "kuiper_cdf");
    if (x == 0.0) {  // K > 0 a.s.
        if (trunc_bound) *trunc_bound = 0.0;
        return 0.0;
    }
    const double x2 = x * x;
    double sum = 1.0;
    double bound = 0.0;
    bool converged = false;
    for (int k = 1; k <= acc.max_terms; ++k) {
        const double k2x2 = k * double(k) * x2;
        sum += 2.0 * (1.0 - 4.0 * k2x2) * std::exp(-2.0 * k2x2);
        const double k1 = k + 1.0;
        const double next = 2.0 * (1.0 + 4.0 * k1 * k1 * x2) * std::exp(-2.0 * k1 * k1 * x2);
        const double ratio =
            ((k + 2.0) / k1) * ((k + 2.0) / k1) * std::exp(-2.0 * (2.0 * k + 3.0) * x2);
        if (ratio < 1.0) {
            bound = next / (1.0 - ratio);
            if (bound <= acc.abs_tol) {
                converged = true;
                break;
            }
        }
    }
    detail::cap_check(converged, "kuiper_cdf", sum, bound);
    if (trunc_bound) *trunc_bound = bound;
    return detail::clamp_prob(sum, acc.abs_tol + bound, "kuiper_cdf");
}

// P(M+ - M- >= z) = sum_{k>=1} exp(-2 k^2 z^2) / (4 k^2 - 1).  At z = 0 the
// sum telescopes to 1/2 exactly.  Positive terms, geometric tail.
inline double diff_tail(double z, const Accuracy& acc = {}, double* trunc_bound = nullptr) {
    detail::require_nonneg(z, "diff_tail");
    if (z == 0.0) {
        if (trunc_bound) *trunc_bound = 0.0;
        return 0.5;
    }
    double sum = 0.0;
    double bound = 0.0;
    bool converged = false;
    for (int k = 1; k <= acc.max_terms; ++k) {
        sum += std::exp(-2.0 * k * k * z * z) / (4.0 * k * double(k) - 1.0);
        const double k1 = k + 1.0;
        const double next = std::exp(-2.0 * k1 * k1 * z * z) / (4.0 * k1 * k1 - 1.0);
        const double ratio = std::exp(-2.0 * (2.0 * k + 3.0) * z * z);
        if (ratio < 1.0) {
            bound = next / (1.0 - ratio);
            if (bound <= acc.abs_tol) {
                converged = true;
                break;
            }
        }
    }
    detail::cap_check(converged, "diff_tail", sum, bound);
    if (trunc_bound) *trunc_bound = bound;
    return detail::clamp_prob(sum, acc.abs_tol + bound, "diff_tail");
}

// F_Q(z) = (1/(z+1)) (1 - u cot u), u = pi z / (z+1), for Q = M+/M-.
// Exact elementary formula.  For small u the difference 1 - u cot u cancels
// catastrophically, so the numerator sin u - u cos u gets its own series
// (= sum_{k>=1} (-1)^{k+1} 2k u^{2k+1}/(2k+1)!, eight terms cover u < 1/2 to
// full precision); for z > 1 we evaluate via eps = pi - u = pi/(z+1), which
// also makes F_Q(z) + F_Q(1/z) = 1 hold to rounding.
inline double quotient_cdf(double z) {
    detail::require_nonneg(z, "quotient_cdf");
    if (z == 0.0) return 0.0;
    if (z == 1.0) return 0.5;   // symmetry point of F(z) + F(1/z) = 1
    if (std::isinf(z)) return 1.0;
    if (z <= 1.0) {
        const double u = std::numbers::pi * z / (z + 1.0);
        if (u < 0.5) {
            double term = u * u * u / 3.0;
            double num = term;
            for (int k = 2; k <= 8; ++k) {
                term *= -u * u * (k / (k - 1.0)) / ((2.0 * k) * (2.0 * k + 1.0));
                num += term;
            }
            return num / std::sin(u) / (z + 1.0);
        }
        return (1.0 - u * std::cos(u) / std::sin(u)) / (z + 1.0);
    }
    const double eps = std::numbers::pi / (z + 1.0);
    return (1.0 + (std::numbers::pi - eps) * std::cos(eps) / std::sin(eps)) / (z + 1.0);
}

// Moment constants of (M+, M-); corr is computed from the other fields.
inline ExtremaMoments extrema_moments() {
    const double pi = std::numbers::pi;
    ExtremaMoments em;
    em.mean_mplus = std::sqrt(2.0 * pi) / 4.0;
    em.var_mplus = 0.5 - pi / 8.0;
    em.e_product = pi * pi / 12.0 - 0.5;
    em.cov = pi * pi / 12.0 - 0.5 - pi / 8.0;
    em.corr = em.cov / em.var_mplus;
    return em;
}

}  // namespace bridge_extrema
