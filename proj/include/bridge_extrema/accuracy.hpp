#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bridge_extrema {

// Controls every truncated series evaluation: sum until the tail bound drops
// to abs_tol or max_terms is hit (the latter raises accuracy_error).
struct Accuracy {
    double abs_tol = 1e-12;
    int max_terms = 200;
};

// Raised when a series hits its term cap before reaching abs_tol, or when a
// result strays outside [0,1] by more than the tolerance.  Carries the best
// value obtained so far and the truncation bound at the point of failure.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double best_value, double bound)
        : std::runtime_error(what), best_value_(best_value), bound_(bound) {}
    double best_value() const { return best_value_; }
    double bound() const { return bound_; }

private:
    double best_value_;
    double bound_;
};

namespace detail {

// Probabilities may pick up terminal rounding noise of order abs_tol; clamp
// that, but treat anything larger as a wrong truncation.
inline double clamp_prob(double v, double abs_tol, const char* who) {
    if (v < 0.0) {
        if (-v > abs_tol)
            throw accuracy_error(std::string(who) + ": value below 0 beyond tolerance", v, -v);
        return 0.0;
    }
    if (v > 1.0) {
        if (v - 1.0 > abs_tol)
            throw accuracy_error(std::string(who) + ": value above 1 beyond tolerance", v, v - 1.0);
        return 1.0;
    }
    return v;
}

}  // namespace detail
}  // namespace bridge_extrema
