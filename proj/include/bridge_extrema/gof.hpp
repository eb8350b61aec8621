#pragma once

// One-sided KS, two-sided KS, and Kuiper tests against a fully specified
// null CDF, with p-values from the asymptotic laws (F_M for KS, F_K for
// Kuiper, exp(-2 n d+^2) one-sided).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bridge_extrema/accuracy.hpp"
#include "bridge_extrema/distributions.hpp"

namespace bridge_extrema {

// Data sample held sorted; NaN rejected at construction.  Ties are allowed
// and handled by the usual order-statistic conventions.
struct Sample {
    std::vector<double> values;

    explicit Sample(std::vector<double> v) : values(std::move(v)) {
        if (values.empty()) throw std::invalid_argument("Sample: empty");
        for (const double x : values)
            if (std::isnan(x)) throw std::invalid_argument("Sample: NaN value");
        std::sort(values.begin(), values.end());
    }

    std::size_t n() const { return values.size(); }
};

struct Discrepancies {
    double d_plus = 0.0;    // max_i ( i/n - F(x_(i)) )
    double d_minus = 0.0;   // max_i ( F(x_(i)) - (i-1)/n )
    double d = 0.0;         // max of the two
    double v = 0.0;         // their sum (Kuiper)
};

inline Discrepancies ecdf_discrepancies(const Sample& s,
                                        const std::function<double(double)>& null_cdf) {
    const double n = static_cast<double>(s.n());
    Discrepancies out;
    out.d_plus = -1.0;
    out.d_minus = -1.0;
    for (std::size_t i = 0; i < s.n(); ++i) {
        const double f = null_cdf(s.values[i]);
        out.d_plus = std::max(out.d_plus, (static_cast<double>(i) + 1.0) / n - f);
        out.d_minus = std::max(out.d_minus, f - static_cast<double>(i) / n);
    }
    // i = n gives d_plus >= 1 - F(x_(n)) >= 0 and i = 1 gives
    // d_minus >= F(x_(1)) >= 0, so both maxima are nonnegative.
    out.d = std::max(out.d_plus, out.d_minus);
    out.v = out.d_plus + out.d_minus;
    return out;
}

enum class GofTest { ks, ks_plus, kuiper };

struct GofReport {
    double stat_raw = 0.0;
    double stat_scaled = 0.0;   // sqrt(n) * stat_raw
    double p_value = 1.0;
    GofTest test = GofTest::ks;
    bool small_sample_warning = false;   // asymptotic law dubious below the threshold
};

namespace detail {

// The asymptotic CDFs are astronomically small below scaled statistics of
// about 0.02 and their theta series need ever more terms there; the
// p-value is 1 to double precision long before that, so short-circuit.
constexpr double kTinyScaled = 0.02;
inline const Accuracy& gof_accuracy() {
    static const Accuracy acc{1e-10, 2000};
    return acc;
}

}  // namespace detail

inline GofReport ks_test(const Sample& s, const std::function<double(double)>& null_cdf,
                         std::size_t warn_below = 20) {
    const Discrepancies disc = ecdf_discrepancies(s, null_cdf);
    GofReport r;
    r.test = GofTest::ks;
    r.stat_raw = disc.d;
    r.stat_scaled = std::sqrt(static_cast<double>(s.n())) * disc.d;
    r.p_value = r.stat_scaled < detail::kTinyScaled
                    ? 1.0
                    : 1.0 - ks_cdf(r.stat_scaled, detail::gof_accuracy());
    r.small_sample_warning = s.n() < warn_below;
    return r;
}

inline GofReport ks_plus_test(const Sample& s, const std::function<double(double)>& null_cdf,
                              std::size_t warn_below = 20) {
    const Discrepancies disc = ecdf_discrepancies(s, null_cdf);
    GofReport r;
    r.test = GofTest::ks_plus;
    r.stat_raw = disc.d_plus;
    r.stat_scaled = std::sqrt(static_cast<double>(s.n())) * disc.d_plus;
    r.p_value = std::exp(-2.0 * r.stat_scaled * r.stat_scaled);
    r.small_sample_warning = s.n() < warn_below;
    return r;
}

inline GofReport kuiper_test(const Sample& s, const std::function<double(double)>& null_cdf,
                             std::size_t warn_below = 20) {
    const Discrepancies disc = ecdf_discrepancies(s, null_cdf);
    GofReport r;
    r.test = GofTest::kuiper;
    r.stat_raw = disc.v;
    r.stat_scaled = std::sqrt(static_cast<double>(s.n())) * disc.v;
    r.p_value = r.stat_scaled < detail::kTinyScaled
                    ? 1.0
                    : 1.0 - kuiper_cdf(r.stat_scaled, detail::gof_accuracy());
    r.small_sample_warning = s.n() < warn_below;
    return r;
}

}  // namespace bridge_extrema
