#pragma once

// Exponentially killed (gamma-rescaled) laws.  Killing the driving motion at
// an independent Exp(theta) time S and rescaling bridge extrema by sqrt(g),
// g ~ Gamma(1/2, theta), turns every theta-series law of distributions.hpp
// into an elementary hyperbolic closed form with rate c = sqrt(2*theta).
// gamma_mix_check ties the two layers together numerically.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bridge_extrema/accuracy.hpp"

namespace bridge_extrema {

struct ThetaParam {
    explicit ThetaParam(double th = 0.5) : theta(th) {
        if (!(th > 0.0)) throw std::domain_error("ThetaParam: theta must be > 0");
    }
    double theta;
    double c() const { return std::sqrt(2.0 * theta); }  // recomputed, never stored
};

struct LocalTimeLevel {
    explicit LocalTimeLevel(double level = 0.0) : t(level) {
        if (!(level >= 0.0)) throw std::domain_error("LocalTimeLevel: t must be >= 0");
    }
    double t;
};

struct QuadratureSpec {
    double rel_tol = 1e-9;
    int max_depth = 15;  // adaptive bisection depth of the Gauss-Kronrod rule
};

namespace detail {

// Adaptive Gauss-Kronrod on a finite interval; semi-infinite integrals are
// truncated by the caller where the integrand's exponential factor is
// negligible relative to rel_tol (each op documents its cutoff).
template <class F>
double integrate(const F& f, double a, double b, const QuadratureSpec& q, const char* who) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, q.max_depth, q.rel_tol, &err);
    if (!(err <= q.rel_tol * (std::abs(v) + 1.0)))
        throw accuracy_error(std::string(who) + ": quadrature did not converge", v, err);
    return v;
}

}  // namespace detail

// Excursion rate m(x) = c e^{-2xc} / (1 - e^{-2xc}) = c / (e^{2xc} - 1):
// mean measure of killed excursions with maximum >= x.  Diverges at 0+.
inline double excursion_rate(double x, const ThetaParam& tp) {
    if (!(x > 0.0)) throw std::domain_error("excursion_rate: x must be > 0");
    return tp.c() / std::expm1(2.0 * x * tp.c());
}

enum class RescaledKind { onesided_tail, max_cdf, min_tail, joint_cdf, sum_cdf };

// Closed forms of the sqrt(g)-rescaled extrema laws, c = sqrt(2*theta):
//   onesided_tail  P(sqrt(g) M+ >= x) = e^{-2xc}
//   max_cdf        P(sqrt(g) M  <= x) = tanh(xc)
//   min_tail       P(sqrt(g) m  >  x) = 1 - 2c/(c+m(x)) + c/(c+2m(x))
//   joint_cdf      P(sqrt(g) M+ <= x, sqrt(g) M- <= y)
//                    = 2 sinh(xc) sinh(yc) / sinh((x+y)c)
//   sum_cdf        P(sqrt(g) K  <= x) = coth(xc) - xc/sinh^2(xc)
inline double rescaled_law(RescaledKind kind, double x, std::optional<double> y,
                           const ThetaParam& tp) {
    if (!(x >= 0.0)) throw std::domain_error("rescaled_law: x must be >= 0");
    if (kind == RescaledKind::joint_cdf) {
        if (!y) throw std::invalid_argument("rescaled_law: joint_cdf requires y");
        if (!(*y >= 0.0)) throw std::domain_error("rescaled_law: y must be >= 0");
    } else if (y) {
        throw std::invalid_argument("rescaled_law: y only valid for joint_cdf");
    }
    const double c = tp.c();
    switch (kind) {
        case RescaledKind::onesided_tail:
            return std::exp(-2.0 * x * c);
        case RescaledKind::max_cdf:
            return std::tanh(x * c);
        case RescaledKind::min_tail: {
            if (x == 0.0) return 1.0;  // m(x) diverges; the tail limit is 1
            const double m = excursion_rate(x, tp);
            return 1.0 - 2.0 * c / (c + m) + c / (c + 2.0 * m);
        }
        case RescaledKind::joint_cdf: {
            // 2 sinh(a) sinh(b) / sinh(a+b) = (1-e^{-2a})(1-e^{-2b})/(1-e^{-2(a+b)}),
            // overflow-free for large arguments.
            const double a = x * c, b = *y * c;
            if (a + b == 0.0) return 0.0;
            return std::expm1(-2.0 * a) * std::expm1(-2.0 * b) / (-std::expm1(-2.0 * (a + b)));
        }
        case RescaledKind::sum_cdf: {
            const double u = x * c;
            if (u < 1e-4) return 2.0 * u / 3.0 - 4.0 * u * u * u / 45.0;  // cot series
            const double e = std::exp(-2.0 * u);
            const double coth = (1.0 + e) / (1.0 - e);
            const double u_over_sinh2 = 4.0 * u * e / ((1.0 - e) * (1.0 - e));
            return coth - u_over_sinh2;
        }
    }
    throw std::logic_error("rescaled_law: unreachable");
}

// P(sqrt(g) M+ <= x, sqrt(g) M- <= y | L(g_S) = t) = e^{-t (m(x) + m(y))}:
// the two sides are conditionally independent given the local time at 0.
inline double conditional_pair_cdf(double x, double y, const LocalTimeLevel& lt,
                                   const ThetaParam& tp) {
    if (lt.t == 0.0) return 1.0;  // empty excursion set
    const double mx = std::isinf(x) ? 0.0 : excursion_rate(x, tp);
    const double my = std::isinf(y) ? 0.0 : excursion_rate(y, tp);
    return std::exp(-lt.t * (mx + my));
}

// P(U - V >= z) = 2c Int_0^inf sinh^2(cu) / sinh^2(c(2u+z)) du for the
// rescaled pair (U,V).  The integrand is evaluated in the overflow-free form
// e^{-2c(u+z)} [(1-e^{-2cu})/(1-e^{-2c(2u+z)})]^2; it decays like
// e^{-2c(u+z)}, so the upper limit is cut at u = 20/c (tail < e^{-40}).
inline double rescaled_diff_tail(double z, const ThetaParam& tp, const QuadratureSpec& q = {}) {
    if (!(z >= 0.0)) throw std::domain_error("rescaled_diff_tail: z must be >= 0");
    if (std::isinf(z)) return 0.0;
    const double c = tp.c();
    auto g = [c, z](double u) {
        if (u <= 0.0) return z == 0.0 ? 0.25 : 0.0;
        const double num = -std::expm1(-2.0 * c * u);
        const double den = -std::expm1(-2.0 * c * (2.0 * u + z));
        const double r = num / den;
        return std::exp(-2.0 * c * (u + z)) * r * r;
    };
    const double v = 2.0 * c * detail::integrate(g, 0.0, 20.0 / c + z, q, "rescaled_diff_tail");
    return detail::clamp_prob(v, 10.0 * q.rel_tol, "rescaled_diff_tail");
}

// psi(t) = Int_0^inf (1 - e^{-t m(x)}) dx: conditional mean of the rescaled
// one-sided maximum given local time t.  Substituting w = t m(x) gives
//   psi(t) = (t/2) Int_0^inf (1 - e^{-w}) / (w (w + tc)) dw,
// split via 1/(w(w+a)) = (1/a)(1/w - 1/(w+a)) with a = tc.  The shifted
// piece keeps a boundary layer of width a at w = 0, so it is integrated in
// v = log1p(w/a), where the layer becomes a unit-width smooth shoulder and
// the integrand -expm1(-a(e^v - 1)) stays in [0, 1).  Tail beyond W is
// log1p(a/W)/(2c) up to O(e^{-W}).
inline double conditional_mean_extremum(const LocalTimeLevel& lt, const ThetaParam& tp,
                                        const QuadratureSpec& q = {}) {
    if (lt.t == 0.0) return 0.0;
    const double c = tp.c();
    const double a = lt.t * c;
    auto one_minus_exp_over_w = [](double w) {
        return w < 1e-8 ? 1.0 - 0.5 * w : -std::expm1(-w) / w;
    };
    auto shoulder = [a](double v) { return -std::expm1(-a * std::expm1(v)); };
    constexpr double W = 60.0;
    const double i1 = detail::integrate(one_minus_exp_over_w, 0.0, W, q,
                                        "conditional_mean_extremum");
    const double i2 = detail::integrate(shoulder, 0.0, std::log1p(W / a), q,
                                        "conditional_mean_extremum");
    return (i1 - i2 + std::log1p(a / W)) / (2.0 * c);
}

// Gamma-mixture bridge between the layers: computes
//   sqrt(theta/pi) Int_0^inf F(x/sqrt(s)) s^{-1/2} e^{-theta s} ds
// (substituting s = v^2 to remove the endpoint singularity, upper limit cut
// at v = sqrt(40/theta)) and returns its difference from the rescaled form.
inline double gamma_mix_check(const std::function<double(double)>& unscaled_fn,
                              const std::function<double(double)>& rescaled_value_fn, double x,
                              const ThetaParam& tp, const QuadratureSpec& q = {}) {
    if (!(x > 0.0)) throw std::domain_error("gamma_mix_check: x must be > 0");
    auto g = [&unscaled_fn, x, th = tp.theta](double v) {
        if (v <= 0.0) return 0.0;
        return unscaled_fn(x / v) * std::exp(-th * v * v);
    };
    const double upper = std::sqrt(40.0 / tp.theta);
    const double mix = 2.0 * std::sqrt(tp.theta / std::numbers::pi) *
                       detail::integrate(g, 0.0, upper, q, "gamma_mix_check");
    return mix - rescaled_value_fn(x);
}

// First and second moments of psi(L) with L ~ Exp(1): the mean of one
// rescaled extremum and the product moment E(U V) of the rescaled pair
// (conditionally independent given L, each with conditional mean psi(L)).
// Only derived at theta = 1/2, where the local time at the last zero is
// standard exponential; other theta refused.
struct PsiMoments {
    double first;    // E psi(L)   = 1/2
    double second;   // E psi(L)^2 = pi^2/12 - 1/2
};

inline PsiMoments psi_moments(const ThetaParam& tp, const QuadratureSpec& q = {}) {
    if (tp.theta != 0.5)
        throw std::invalid_argument("psi_moments: derived only for theta = 1/2");
    // The outer quadrature cannot converge past the noise floor of the inner
    // psi evaluations, so those run three digits tighter; psi ~ t log t at
    // 0 also forces deeper endpoint bisection than the smooth inner
    // integrands ever need.
    const QuadratureSpec inner{std::max(1e-13, q.rel_tol * 1e-3), q.max_depth};
    const QuadratureSpec outer{q.rel_tol, std::max(q.max_depth, 25)};
    auto mean_integrand = [&](double t) {
        return conditional_mean_extremum(LocalTimeLevel(t), tp, inner) * std::exp(-t);
    };
    auto second_integrand = [&](double t) {
        const double psi = conditional_mean_extremum(LocalTimeLevel(t), tp, inner);
        return psi * psi * std::exp(-t);
    };
    // psi grows only logarithmically, so the integrand tail beyond 60 is
    // below e^{-60} * psi(60)^2 ~ 1e-25
    const double e1 = detail::integrate(mean_integrand, 0.0, 60.0, outer, "psi_moments");
    const double e2 = detail::integrate(second_integrand, 0.0, 60.0, outer, "psi_moments");
    return {e1, e2};
}

// cov(U,V) = E(UV) - E(U)E(V) = pi^2/12 - 3/4 at theta = 1/2.
inline double covariance_rescaled(const ThetaParam& tp, const QuadratureSpec& q = {}) {
    const PsiMoments m = psi_moments(tp, q);
    return m.second - m.first * m.first;
}

}  // namespace bridge_extrema
