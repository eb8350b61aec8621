#pragma once

// Counter-splittable random streams.
//
// Stream derivation: stream i of master seed s is an xoshiro256++ generator
// whose state is four consecutive outputs of a splitmix64 sequence keyed by
// the (i+1)-th output of splitmix64(s).  Both steps are pure functions of
// (s, i), so any path/sample index can be seeded in O(1) independent of
// evaluation order -- the reproducibility contract for parallel Monte Carlo.
//
// Normal and exponential variates use the Marsaglia-Tsang ziggurat (128 and
// 256 layers); the rejection branches fall back to exact tail sampling.

#include <cmath>
#include <cstdint>

namespace bridge_extrema {

class splitmix64 {
public:
    explicit splitmix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

class xoshiro256pp {
public:
    explicit xoshiro256pp(uint64_t seed) {
        splitmix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

namespace detail {

// Ziggurat tables, set up once per process (Marsaglia & Tsang 2000 layout:
// kn/wn/fn for the half-normal over 128 layers, ke/we/fe for Exp(1) over
// 256; R_normal = 3.442619855899, R_exp = 7.697117470131487).
struct zig_tables {
    uint32_t kn[128];
    double wn[128], fn[128];
    uint32_t ke[256];
    double we[256], fe[256];

    zig_tables() {
        const double m1 = 2147483648.0, m2 = 4294967296.0;
        double dn = 3.442619855899, tn = dn, vn = 9.91256303526217e-3;
        double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = static_cast<uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
        double de = 7.697117470131487, te = de, ve = 3.949659822581572e-3;
        q = ve / std::exp(-de);
        ke[0] = static_cast<uint32_t>((de / q) * m2);
        ke[1] = 0;
        we[0] = q / m2;
        we[255] = de / m2;
        fe[0] = 1.0;
        fe[255] = std::exp(-de);
        for (int i = 254; i >= 1; --i) {
            de = -std::log(ve / de + std::exp(-de));
            ke[i + 1] = static_cast<uint32_t>((de / te) * m2);
            te = de;
            fe[i] = std::exp(-de);
            we[i] = de / m2;
        }
    }
};

inline const zig_tables& zig() {
    static const zig_tables tables;
    return tables;
}

}  // namespace detail

// One independent random stream; all distributional draws of the library go
// through this class so per-path consumption is well defined.
class rng_stream {
public:
    explicit rng_stream(uint64_t key) : gen_(key) {}

    uint64_t next_u64() { return gen_.next(); }

    // uniform on [0,1), 53-bit resolution
    double uniform() { return (gen_.next() >> 11) * 0x1.0p-53; }

    // uniform on (0,1), for logs
    double uniform_pos() {
        double u;
        do u = uniform();
        while (u == 0.0);
        return u;
    }

    double normal() {
        const auto& z = detail::zig();
        const double r = 3.442619855899;
        auto hz = static_cast<int32_t>(gen_.next() >> 32);
        uint32_t iz = static_cast<uint32_t>(hz) & 127u;
        for (;;) {
            const uint32_t ahz = hz < 0 ? static_cast<uint32_t>(-static_cast<int64_t>(hz))
                                        : static_cast<uint32_t>(hz);
            if (ahz < z.kn[iz]) return hz * z.wn[iz];
            if (iz == 0) {  // exact tail beyond R
                double x, y;
                do {
                    x = -std::log(uniform_pos()) / r;
                    y = -std::log(uniform_pos());
                } while (y + y < x * x);
                return hz > 0 ? r + x : -(r + x);
            }
            const double x = hz * z.wn[iz];
            if (z.fn[iz] + uniform() * (z.fn[iz - 1] - z.fn[iz]) < std::exp(-0.5 * x * x))
                return x;
            hz = static_cast<int32_t>(gen_.next() >> 32);
            iz = static_cast<uint32_t>(hz) & 127u;
        }
    }

    double exponential() {
        const auto& z = detail::zig();
        uint32_t jz = static_cast<uint32_t>(gen_.next() >> 32);
        uint32_t iz = jz & 255u;
        for (;;) {
            if (jz < z.ke[iz]) return jz * z.we[iz];
            if (iz == 0) return 7.697117470131487 - std::log(uniform_pos());
            const double x = jz * z.we[iz];
            if (z.fe[iz] + uniform() * (z.fe[iz - 1] - z.fe[iz]) < std::exp(-x)) return x;
            jz = static_cast<uint32_t>(gen_.next() >> 32);
            iz = jz & 255u;
        }
    }

private:
    xoshiro256pp gen_;
};

// Stream i of master seed s; O(1), order-independent.  The key is the
// (i+1)-th output of the splitmix64 sequence started at s, computed by
// jumping the state directly to s + i*gamma.
inline rng_stream make_stream(uint64_t master_seed, uint64_t index) {
    splitmix64 sm(master_seed + index * 0x9E3779B97F4A7C15ULL);
    return rng_stream(sm.next());
}

}  // namespace bridge_extrema
