#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bridge_extrema/distributions.hpp"

using namespace bridge_extrema;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Frozen oracles: extended-precision partial sums (n, |k| up to 50) of the
// theta series, computed independently of this implementation.
namespace {
constexpr double kKs05 = 0.036054756335124906;
constexpr double kKs10 = 0.73000032832264548;
constexpr double kMin05 = 0.24911607576039175;
constexpr double kJoint0710 = 0.62468890114860046;
constexpr double kKuiper10 = 0.17792335564307068;
constexpr double kDiff10 = 0.045134125689206878;
constexpr double kDiff05 = 0.21152200124094429;
constexpr double kQuot2 = 0.73639985871871508;
}  // namespace

TEST_CASE("one_sided_tail elementary values", "[distributions]") {
    CHECK(one_sided_tail(0.0) == 1.0);
    CHECK_THAT(one_sided_tail(0.5), WithinRel(std::exp(-0.5), 1e-15));
    CHECK_THAT(one_sided_tail(1.0), WithinRel(std::exp(-2.0), 1e-15));
    CHECK_THROWS_AS(one_sided_tail(-0.1), std::domain_error);
}

TEST_CASE("ks_cdf oracle values and limits", "[distributions]") {
    CHECK(ks_cdf(0.0) == 0.0);
    CHECK_THAT(ks_cdf(0.5), WithinAbs(kKs05, 1e-13));
    CHECK_THAT(ks_cdf(1.0), WithinAbs(kKs10, 1e-13));
    CHECK_THAT(ks_cdf(10.0), WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(ks_cdf(-1.0), std::domain_error);
}

TEST_CASE("ks_cdf cap hit raises accuracy_error with best value", "[distributions]") {
    // at z = 0.05 the terms decay like e^{-0.005 n^2}: three terms are hopeless
    try {
        ks_cdf(0.05, Accuracy{1e-12, 3});
        FAIL("expected accuracy_error");
    } catch (const accuracy_error& e) {
        CHECK(e.bound() > 1e-12);
        CHECK(std::isfinite(e.best_value()));
    }
}

TEST_CASE("min_extremum_tail oracle values and limits", "[distributions]") {
    CHECK(min_extremum_tail(0.0) == 1.0);
    CHECK_THAT(min_extremum_tail(0.5), WithinAbs(kMin05, 1e-13));
    CHECK_THAT(min_extremum_tail(5.0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("joint_cdf oracle values, degenerate edges", "[distributions]") {
    CHECK_THAT(joint_cdf(0.5, 0.5), WithinAbs(kKs05, 1e-13));
    // w = 10 reduces to the one-sided marginal 1 - e^{-2 z^2}
    CHECK_THAT(joint_cdf(0.7, 10.0), WithinAbs(kJoint0710, 1e-10));
    CHECK(joint_cdf(0.0, 1.0) == 0.0);
    CHECK(joint_cdf(1.0, 0.0) == 0.0);
}

TEST_CASE("kuiper_cdf oracle values and limits", "[distributions]") {
    CHECK(kuiper_cdf(0.0) == 0.0);
    CHECK_THAT(kuiper_cdf(1.0), WithinAbs(kKuiper10, 1e-13));
    CHECK_THAT(kuiper_cdf(8.0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("diff_tail oracle values, exact telescoped zero point", "[distributions]") {
    CHECK(diff_tail(0.0) == 0.5);  // sum of 1/(4k^2-1) telescopes exactly
    const Accuracy tight{1e-15, 2000};
    CHECK_THAT(diff_tail(1.0, tight), WithinAbs(kDiff10, 1e-13));
    CHECK_THAT(diff_tail(0.5, tight), WithinAbs(kDiff05, 1e-13));
    // single-term dominance far out
    CHECK_THAT(diff_tail(6.0), WithinRel(std::exp(-72.0) / 3.0, 1e-12));
}

TEST_CASE("quotient_cdf elementary values and symmetry", "[distributions]") {
    CHECK(quotient_cdf(0.0) == 0.0);
    CHECK(quotient_cdf(1.0) == 0.5);
    CHECK_THAT(quotient_cdf(2.0), WithinAbs(kQuot2, 1e-13));
    CHECK(quotient_cdf(std::numeric_limits<double>::infinity()) == 1.0);
    for (const double z : {0.25, 0.5, 2.0, 4.0})
        CHECK_THAT(quotient_cdf(z) + quotient_cdf(1.0 / z), WithinAbs(1.0, 1e-12));
    // the small-z branch continues the cot form smoothly
    CHECK_THAT(quotient_cdf(1e-6), WithinRel(std::numbers::pi * std::numbers::pi * 1e-12 / 3.0,
                                             1e-5));
}

TEST_CASE("extrema moment constants", "[distributions]") {
    const ExtremaMoments em = extrema_moments();
    CHECK_THAT(em.mean_mplus, WithinAbs(0.62665706865775013, 1e-15));
    CHECK_THAT(em.var_mplus, WithinAbs(0.10730091830127585, 1e-15));
    CHECK_THAT(em.e_product, WithinAbs(0.32246703342411322, 1e-15));
    CHECK_THAT(em.cov, WithinAbs(-0.070232048274610937, 1e-15));
    CHECK_THAT(em.corr, WithinAbs(-0.65453352484287036, 1e-14));
    CHECK(em.corr == em.cov / em.var_mplus);
    CHECK(em.cov < 0.0);
    CHECK(em.corr > -1.0);
    CHECK(em.corr < 0.0);
}

TEST_CASE("marginal, diagonal and decomposition identities on a grid", "[distributions]") {
    for (int i = 1; i <= 30; ++i) {
        const double z = 0.1 * i;
        CAPTURE(z);
        // y = 50 makes the second constraint vacuous
        CHECK_THAT(joint_cdf(z, 50.0), WithinAbs(1.0 - one_sided_tail(z), 1e-10));
        CHECK_THAT(joint_cdf(z, z), WithinAbs(ks_cdf(z), 1e-10));
        // P(M > z) + P(m > z) = 2 P(M+ > z)
        CHECK_THAT((1.0 - ks_cdf(z)) + min_extremum_tail(z),
                   WithinAbs(2.0 * std::exp(-2.0 * z * z), 1e-10));
        // K >= M pathwise
        CHECK(kuiper_cdf(z) <= ks_cdf(z) + 1e-12);
    }
}

TEST_CASE("CDFs nondecreasing, tails nonincreasing", "[distributions]") {
    // series values carry truncation noise of order abs_tol where the true
    // value is far below it (deep left tails), so compare with that slack
    constexpr double slack = 1e-12;
    double prev_ks = -1.0, prev_kuiper = -1.0, prev_quot = -1.0, prev_joint = -1.0;
    double prev_one = 2.0, prev_min = 2.0, prev_diff = 2.0;
    for (int i = 1; i <= 60; ++i) {
        const double z = 0.05 * i;
        CAPTURE(z);
        const double ks = ks_cdf(z), kp = kuiper_cdf(z), qt = quotient_cdf(z);
        const double jt = joint_cdf(z, 1.0);
        const double on = one_sided_tail(z), mn = min_extremum_tail(z), df = diff_tail(z);
        CHECK(ks >= prev_ks - slack);
        CHECK(kp >= prev_kuiper - slack);
        CHECK(qt >= prev_quot - slack);
        CHECK(jt >= prev_joint - slack);
        CHECK(on <= prev_one + slack);
        CHECK(mn <= prev_min + slack);
        CHECK(df <= prev_diff + slack);
        prev_ks = ks;
        prev_kuiper = kp;
        prev_quot = qt;
        prev_joint = jt;
        prev_one = on;
        prev_min = mn;
        prev_diff = df;
    }
}

TEST_CASE("truncation bounds dominate the true remainder", "[distributions]") {
    // a loose-tolerance sum, certified against a much longer summation
    const Accuracy loose{1e-4, 200};
    const Accuracy tight{1e-15, 2000};
    for (const double z : {0.3, 0.5, 0.8, 1.0, 1.5, 2.0}) {
        CAPTURE(z);
        double b_ks = 0.0, b_min = 0.0, b_joint = 0.0, b_kuiper = 0.0, b_diff = 0.0;
        const double ks_l = ks_cdf(z, loose, &b_ks);
        const double min_l = min_extremum_tail(z, loose, &b_min);
        const double joint_l = joint_cdf(z, 0.7, loose, &b_joint);
        const double kuiper_l = kuiper_cdf(z, loose, &b_kuiper);
        const double diff_l = diff_tail(z, loose, &b_diff);
        CHECK(std::abs(ks_l - ks_cdf(z, tight)) <= b_ks + 1e-15);
        CHECK(std::abs(min_l - min_extremum_tail(z, tight)) <= b_min + 1e-15);
        CHECK(std::abs(joint_l - joint_cdf(z, 0.7, tight)) <= b_joint + 1e-15);
        CHECK(std::abs(kuiper_l - kuiper_cdf(z, tight)) <= b_kuiper + 1e-15);
        CHECK(std::abs(diff_l - diff_tail(z, tight)) <= b_diff + 1e-15);
        CHECK(b_ks <= loose.abs_tol);
        CHECK(b_min <= loose.abs_tol);
        CHECK(b_joint <= loose.abs_tol);
        CHECK(b_kuiper <= loose.abs_tol);
        CHECK(b_diff <= loose.abs_tol);
    }
}
