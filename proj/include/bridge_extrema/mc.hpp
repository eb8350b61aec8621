#pragma once

// Monte Carlo counterparts of the closed-form laws: Gaussian-walk bridge
// paths, the Vervaat transform, killed Brownian motion with last-zero
// extraction, and indicator/moment estimation over independent per-path
// random streams.
//
// Grid extrema understate continuum extrema by O(sqrt(mesh))
// (Asmussen-Glynn-Pitman boundary bias).  Where the continuum law is the
// target, the estimator refines each grid interval exactly: given adjacent
// values (a, b) at spacing d the interior is a Brownian bridge, whose
// maximum has conditional tail exp(-2(x-a)(x-b)/d); inverting at an Exp(1)
// draw gives max = ((a+b) + sqrt((a-b)^2 + 2dE))/2, and the minimum
// mirrors it.  The running refined extremum over all intervals then has
// the exact continuum law on top of the exact Gaussian skeleton.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "bridge_extrema/laplace.hpp"
#include "bridge_extrema/rng.hpp"

namespace bridge_extrema {

enum class PathKind { bridge, bm_killed };

struct BridgePath {
    int n_steps = 0;              // grid intervals; values.size() == n_steps + 1
    std::vector<double> values;   // value at i/n_steps (bridge) or i*mesh (killed)
    PathKind kind = PathKind::bridge;
};

struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;   // sample std / sqrt(n_paths)
    long n_paths = 0;
};

struct PathExtrema {
    double m_plus = 0.0;
    double m_minus = 0.0;
    double range = 0.0;
    double argmin_time = 0.0;
};

// Gaussian increments scaled by sqrt(1/n) cumulated to a walk W, then
// pinned: values[i] = W[i] - (i/n) W[n].  Exact bridge law at the grid.
inline BridgePath sample_bridge(int n_steps, uint64_t seed) {
    if (n_steps < 2) throw std::invalid_argument("sample_bridge: n_steps must be >= 2");
    rng_stream g = make_stream(seed, 0);
    BridgePath p;
    p.n_steps = n_steps;
    p.kind = PathKind::bridge;
    p.values.resize(n_steps + 1);
    const double sd = std::sqrt(1.0 / n_steps);
    double w = 0.0;
    p.values[0] = 0.0;
    for (int i = 1; i <= n_steps; ++i) {
        w += sd * g.normal();
        p.values[i] = w;
    }
    const double wn = p.values[n_steps];
    for (int i = 1; i <= n_steps; ++i)
        p.values[i] -= (static_cast<double>(i) / n_steps) * wn;
    // i = n gives W[n] - 1.0*W[n] = 0 exactly; restate to be explicit.
    p.values[n_steps] = 0.0;
    return p;
}

// Grid extrema; argmin is the earliest attaining index (a.s. unique in the
// continuum, so the tie rule only affects constructed fixtures).
inline PathExtrema path_extrema(const BridgePath& p) {
    if (p.values.empty()) throw std::invalid_argument("path_extrema: empty path");
    double hi = p.values[0], lo = p.values[0];
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < p.values.size(); ++i) {
        const double v = p.values[i];
        if (v > hi) hi = v;
        if (v < lo) {
            lo = v;
            argmin = i;
        }
    }
    PathExtrema e;
    e.m_plus = hi;
    e.m_minus = -lo;
    e.range = e.m_plus + e.m_minus;
    e.argmin_time = static_cast<double>(argmin) / p.n_steps;
    return e;
}

// Cyclic shift at the grid argmin minus the minimum: e(t) = U_{sigma+t mod 1}
// - U_sigma.  Nonnegative, endpoints zero; its grid maximum equals the
// original range exactly (max and min shift together, one subtraction each).
inline BridgePath vervaat_excursion(const BridgePath& p) {
    const int n = p.n_steps;
    if (n < 1 || p.values.size() != static_cast<std::size_t>(n) + 1)
        throw std::invalid_argument("vervaat_excursion: malformed bridge");
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < p.values.size(); ++i)
        if (p.values[i] < p.values[argmin]) argmin = i;
    const double m = p.values[argmin];
    BridgePath e;
    e.n_steps = n;
    e.kind = PathKind::bridge;
    e.values.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const std::size_t j = (argmin + i) % n;   // identify grid point n with 0
        e.values[i] = p.values[j] - m;
    }
    return e;
}

namespace detail {

inline void neumaier_add(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

inline int worker_count() {
    if (const char* e = std::getenv("BRIDGE_EXTREMA_THREADS")) {
        const int k = std::atoi(e);
        if (k >= 1) return k;
    }
    const unsigned h = std::thread::hardware_concurrency();
    return h ? static_cast<int>(h) : 1;
}

// Exact conditional extrema of one grid interval given endpoint values;
// the two one-sided draws are independent (their continuum coupling within
// a single interval is invisible to the running extrema, which a.s. bind
// on different intervals).
struct IntervalRefine {
    double hi, lo;
};
inline IntervalRefine refine_interval(double a, double b, double d, rng_stream& g) {
    const double s = a + b, q = a - b;
    const double e_hi = g.exponential(), e_lo = g.exponential();
    return {0.5 * (s + std::sqrt(q * q + 2.0 * d * e_hi)),
            0.5 * (s - std::sqrt(q * q + 2.0 * d * e_lo))};
}

}  // namespace detail

enum class ExtremaMode { grid, refined };

// One (M+, M-) draw from stream `path_index` of `seed`; grid mode scans the
// skeleton only, refined mode adds the per-interval conditional draws and
// therefore samples the exact continuum extrema law at any n_steps.
inline std::pair<double, double> sample_extrema_pair(int n_steps, uint64_t seed,
                                                     uint64_t path_index,
                                                     ExtremaMode mode,
                                                     std::vector<double>& scratch) {
    const int n = n_steps;
    rng_stream g = make_stream(seed, path_index);
    scratch.resize(n + 1);
    const double sd = std::sqrt(1.0 / n);
    double w = 0.0;
    scratch[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        w += sd * g.normal();
        scratch[i] = w;
    }
    const double wn = scratch[n];
    double hi = 0.0, lo = 0.0;
    if (mode == ExtremaMode::grid) {
        for (int i = 1; i < n; ++i) {
            const double v = scratch[i] - (static_cast<double>(i) / n) * wn;
            if (v > hi) hi = v;
            if (v < lo) lo = v;
        }
    } else {
        const double d = 1.0 / n;
        double a = 0.0;
        for (int i = 1; i <= n; ++i) {
            const double b = (i == n) ? 0.0 : scratch[i] - (static_cast<double>(i) / n) * wn;
            const auto r = detail::refine_interval(a, b, d, g);
            if (r.hi > hi) hi = r.hi;
            if (r.lo < lo) lo = r.lo;
            a = b;
        }
    }
    return {hi, -lo};
}

inline std::pair<double, double> sample_extrema_pair(int n_steps, uint64_t seed,
                                                     uint64_t path_index,
                                                     ExtremaMode mode = ExtremaMode::refined) {
    std::vector<double> scratch;
    return sample_extrema_pair(n_steps, seed, path_index, mode, scratch);
}

// Exact conditional maximum of the continuum path underlying a grid
// skeleton: the refined interval maxima, maximized.  One Exp draw per
// interval from `g`.
inline double refined_max(const BridgePath& p, rng_stream& g) {
    if (p.values.size() < 2) throw std::invalid_argument("refined_max: need >= 1 interval");
    const double d = 1.0 / p.n_steps;
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < p.values.size(); ++i) {
        const double a = p.values[i], b = p.values[i + 1];
        const double s = a + b, q = a - b;
        const double m = 0.5 * (s + std::sqrt(q * q + 2.0 * d * g.exponential()));
        if (m > hi) hi = m;
    }
    return hi;
}

// Functional of the bridge extrema to be averaged over paths; indicator
// events mirror the closed-form laws, product_moment averages M+ M-.
struct Functional {
    enum class Kind {
        onesided_tail,   // I(M+ >= x)
        max_cdf,         // I(max(M+,M-) <= z)
        min_tail,        // I(min(M+,M-) > z)
        joint_cdf,       // I(M+ <= z and M- <= w)
        kuiper_cdf,      // I(M+ + M- <= x)
        diff_tail,       // I(M+ - M- >= z)
        quotient_cdf,    // I(M+ / M- <= z)
        product_moment,  // M+ M-
    };
    Kind kind = Kind::product_moment;
    double a = 0.0;
    double b = 0.0;

    static Functional onesided_tail(double x) { return make(Kind::onesided_tail, x); }
    static Functional max_cdf(double z) { return make(Kind::max_cdf, z); }
    static Functional min_tail(double z) { return make(Kind::min_tail, z); }
    static Functional joint_cdf(double z, double w) {
        Functional f = make(Kind::joint_cdf, z);
        if (!(w >= 0.0)) throw std::invalid_argument("Functional: argument must be >= 0");
        f.b = w;
        return f;
    }
    static Functional kuiper_cdf(double x) { return make(Kind::kuiper_cdf, x); }
    static Functional diff_tail(double z) { return make(Kind::diff_tail, z); }
    static Functional quotient_cdf(double z) { return make(Kind::quotient_cdf, z); }
    static Functional product_moment() { return Functional{}; }

    double evaluate(double m_plus, double m_minus) const {
        switch (kind) {
            case Kind::onesided_tail: return m_plus >= a ? 1.0 : 0.0;
            case Kind::max_cdf: return std::max(m_plus, m_minus) <= a ? 1.0 : 0.0;
            case Kind::min_tail: return std::min(m_plus, m_minus) > a ? 1.0 : 0.0;
            case Kind::joint_cdf: return (m_plus <= a && m_minus <= b) ? 1.0 : 0.0;
            case Kind::kuiper_cdf: return m_plus + m_minus <= a ? 1.0 : 0.0;
            case Kind::diff_tail: return m_plus - m_minus >= a ? 1.0 : 0.0;
            case Kind::quotient_cdf: return m_plus / m_minus <= a ? 1.0 : 0.0;
            case Kind::product_moment: return m_plus * m_minus;
        }
        return 0.0;
    }

private:
    static Functional make(Kind k, double x) {
        if (!(x >= 0.0)) throw std::invalid_argument("Functional: argument must be >= 0");
        Functional f;
        f.kind = k;
        f.a = x;
        return f;
    }
};

// Averages the functional over n_paths independent paths.  Work is split
// into fixed 4096-path chunks; chunk partial sums are compensated and then
// combined in chunk order, so mean and std_err are bit-identical for any
// worker count (BRIDGE_EXTREMA_THREADS caps the pool).
inline McEstimate estimate(const Functional& f, long n_paths, int n_steps, uint64_t seed,
                           ExtremaMode mode = ExtremaMode::refined) {
    if (n_paths < 2) throw std::invalid_argument("estimate: n_paths must be >= 2");
    if (n_steps < 2) throw std::invalid_argument("estimate: n_steps must be >= 2");
    constexpr long kChunk = 4096;
    const long n_chunks = (n_paths + kChunk - 1) / kChunk;
    std::vector<double> chunk_sum(n_chunks), chunk_sum_sq(n_chunks);
    std::atomic<long> next_chunk{0};

    auto worker = [&]() {
        std::vector<double> scratch;
        for (;;) {
            const long c = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            double s = 0.0, sc = 0.0, s2 = 0.0, s2c = 0.0;
            const long hi = std::min(n_paths, (c + 1) * kChunk);
            for (long i = c * kChunk; i < hi; ++i) {
                const auto [mp, mm] =
                    sample_extrema_pair(n_steps, seed, static_cast<uint64_t>(i), mode, scratch);
                const double x = f.evaluate(mp, mm);
                detail::neumaier_add(s, sc, x);
                detail::neumaier_add(s2, s2c, x * x);
            }
            chunk_sum[c] = s + sc;
            chunk_sum_sq[c] = s2 + s2c;
        }
    };

    const int k = static_cast<int>(std::min<long>(detail::worker_count(), n_chunks));
    if (k <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(k);
        for (int t = 0; t < k; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    double s = 0.0, sc = 0.0, s2 = 0.0, s2c = 0.0;
    for (long c = 0; c < n_chunks; ++c) {
        detail::neumaier_add(s, sc, chunk_sum[c]);
        detail::neumaier_add(s2, s2c, chunk_sum_sq[c]);
    }
    const double total = s + sc, total_sq = s2 + s2c;
    const double n = static_cast<double>(n_paths);
    const double mean = total / n;
    const double var = std::max(0.0, (total_sq - total * total / n) / (n - 1.0));
    return McEstimate{mean, std::sqrt(var / n), n_paths};
}

namespace detail {

// Shared walk for the killed-motion samplers.  Visits the grid of mesh
// 1/n_per_unit up to an Exp(theta) horizon, reporting each increment and
// each detected zero crossing (sign change, linearly interpolated; an exact
// grid zero counts as a crossing at its grid time).  The visitor draw
// stream is exactly: one Exp for the horizon, then one normal per step, so
// every killed-motion front end sees the identical skeleton for a seed.
template <typename OnStep, typename OnCross>
inline std::pair<double, double> killed_walk(const ThetaParam& tp, int n_per_unit,
                                             uint64_t seed, OnStep on_step,
                                             OnCross on_cross) {
    if (n_per_unit < 1)
        throw std::invalid_argument("killed walk: n_steps_per_unit must be >= 1");
    rng_stream g = make_stream(seed, 0);
    const double s_theta = g.exponential() / tp.theta;
    const double total_d = s_theta * n_per_unit;
    const long total =
        total_d < 2147483647.0 ? static_cast<long>(total_d) : 2147483646L;
    const double sd = std::sqrt(1.0 / n_per_unit);
    double prev = 0.0, gtime = 0.0;
    for (long j = 0; j < total; ++j) {
        const double next = prev + sd * g.normal();
        on_step(j, prev, next);
        if ((prev > 0.0 && next < 0.0) || (prev < 0.0 && next > 0.0)) {
            const double frac = prev / (prev - next);
            gtime = (static_cast<double>(j) + frac) / n_per_unit;
            on_cross(j, prev, next, frac, gtime);
        } else if (next == 0.0) {
            gtime = static_cast<double>(j + 1) / n_per_unit;
            on_cross(j, prev, next, 1.0, gtime);
        }
        prev = next;
    }
    return {gtime, s_theta};
}

}  // namespace detail

struct KilledBm {
    BridgePath path;
    double s_theta = 0.0;
    double g = 0.0;   // last detected zero time, 0 if none before the horizon
};

// Brownian motion on a grid of mesh 1/n_steps_per_unit killed at an
// independent Exp(theta) time; g is the last grid crossing (interpolated
// between sign changes), 0 when the path never returns to zero on the grid.
inline KilledBm sample_killed_bm(const ThetaParam& tp, int n_steps_per_unit, uint64_t seed) {
    KilledBm out;
    out.path.kind = PathKind::bm_killed;
    out.path.values.push_back(0.0);
    auto [g, s] = detail::killed_walk(
        tp, n_steps_per_unit, seed,
        [&](long, double, double next) { out.path.values.push_back(next); },
        [](long, double, double, double, double) {});
    out.path.n_steps = static_cast<int>(out.path.values.size()) - 1;
    out.g = g;
    out.s_theta = s;
    return out;
}

struct KilledBmG {
    double g = 0.0;
    double s_theta = 0.0;
};

// g of sample_killed_bm without materializing the path (identical stream
// consumption, hence bit-identical g for the same seed).
inline KilledBmG killed_bm_g(const ThetaParam& tp, int n_steps_per_unit, uint64_t seed) {
    auto [g, s] = detail::killed_walk(tp, n_steps_per_unit, seed,
                                      [](long, double, double) {},
                                      [](long, double, double, double, double) {});
    return {g, s};
}

struct KilledBmExtrema {
    double g = 0.0;
    double s_theta = 0.0;
    double m_plus = 0.0;    // max over [0, g]
    double m_minus = 0.0;   // -min over [0, g]
};

// Extrema of the killed motion over [0, g], with the same g as
// sample_killed_bm (walk and crossings share detail::killed_walk and the
// same stream) and exact conditional refinement of the extrema:
// - every full interval strictly before a crossing contributes its refined
//   extrema to a running pair;
// - at a crossing the stub [t_j, g] is a bridge from prev to 0 of length
//   frac/n, refined with its own draws; the snapshot (running joined with
//   stub) is recorded;
// - the last snapshot is the exact conditional extrema over [0, g] given
//   the skeleton, because intervals after the last crossing never enter it.
// Refinement draws come from a second stream so the walk matches the other
// samplers draw for draw.
inline KilledBmExtrema killed_bm_extrema(const ThetaParam& tp, int n_steps_per_unit,
                                         uint64_t seed) {
    rng_stream refine = make_stream(seed, 1);
    const double d = 1.0 / n_steps_per_unit;
    double run_hi = 0.0, run_lo = 0.0;
    double snap_hi = 0.0, snap_lo = 0.0;
    long pending = -1;        // interval whose full refinement is still owed
    double pa = 0.0, pb = 0.0;
    auto settle = [&](long upto) {
        // fold owed full-interval refinements into the running extrema
        if (pending >= 0 && pending < upto) {
            const auto r = detail::refine_interval(pa, pb, d, refine);
            if (r.hi > run_hi) run_hi = r.hi;
            if (r.lo < run_lo) run_lo = r.lo;
            pending = -1;
        }
    };
    auto [g, s] = detail::killed_walk(
        tp, n_steps_per_unit, seed,
        [&](long j, double a, double b) {
            settle(j);
            pending = j;
            pa = a;
            pb = b;
        },
        [&](long j, double a, double, double frac, double) {
            // snapshot over [0, t_j + frac*d]: running extrema (complete
            // intervals < j) joined with the refined stub from a to 0
            const auto stub = detail::refine_interval(a, 0.0, frac * d, refine);
            snap_hi = std::max(run_hi, stub.hi);
            snap_lo = std::min(run_lo, stub.lo);
        });
    (void)settle;
    if (g == 0.0) return {0.0, s, 0.0, 0.0};
    return {g, s, snap_hi, -snap_lo};
}

// Last sign-change time of a unit-time Brownian motion on an n_steps grid,
// linearly interpolated; 0 when the path never crosses after leaving the
// origin.
inline double last_zero_unit_bm(int n_steps, uint64_t seed) {
    if (n_steps < 2) throw std::invalid_argument("last_zero_unit_bm: n_steps must be >= 2");
    rng_stream g = make_stream(seed, 0);
    const double sd = std::sqrt(1.0 / n_steps);
    double prev = 0.0, gtime = 0.0;
    for (int j = 0; j < n_steps; ++j) {
        const double next = prev + sd * g.normal();
        if ((prev > 0.0 && next < 0.0) || (prev < 0.0 && next > 0.0))
            gtime = (j + prev / (prev - next)) / n_steps;
        else if (next == 0.0)
            gtime = static_cast<double>(j + 1) / n_steps;
        prev = next;
    }
    return gtime;
}

}  // namespace bridge_extrema
