#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// Nothing here calls into the simulator code it is checked against.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <random>
#include <vector>

#include "dcim/costmodel.hpp"
#include "dcim/funcsim.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;
using dcim::sim::FpFormat;
using dcim::sim::FpValue;

struct ScalarFp {
    int sign = 1;
    std::int64_t exponent = 0;  // 0 means zero
    std::uint64_t mantissa = 0;
    bool truncated = false, overflow = false, underflow = false;
};

inline cpp_int signed_mantissa(const FpValue& v) {
    if (v.exponent == 0) return 0;
    return v.sign < 0 ? cpp_int(-cpp_int(v.mantissa)) : cpp_int(v.mantissa);
}

// floor(m / 2^(emax - e)) for each value
inline std::vector<cpp_int> align(const std::vector<FpValue>& vs, std::int64_t& emax) {
    emax = 0;
    for (const auto& v : vs)
        if (v.exponent > emax) emax = v.exponent;
    std::vector<cpp_int> out;
    for (const auto& v : vs) {
        const cpp_int m = signed_mantissa(v);
        const cpp_int d = cpp_int(1) << static_cast<unsigned>(emax - v.exponent);
        cpp_int q = m / d;
        if (q * d != m && m < 0) --q;
        out.push_back(q);
    }
    return out;
}

// One output of the pre-aligned FP datapath, computed directly:
// align both operand groups, exact integer dot product, truncating normalize.
inline ScalarFp fp_dot_step(const std::vector<FpValue>& w, const std::vector<FpValue>& x, const FpFormat& f,
                            cpp_int* raw_out = nullptr) {
    std::int64_t we = 0, xe = 0;
    const auto wa = align(w, we);
    const auto xa = align(x, xe);
    cpp_int raw = 0;
    for (std::size_t i = 0; i < w.size(); ++i) raw += wa[i] * xa[i];
    if (raw_out) *raw_out = raw;
    ScalarFp r;
    if (raw == 0) return r;
    r.sign = raw < 0 ? -1 : 1;
    const cpp_int mag = raw < 0 ? cpp_int(-raw) : raw;
    const std::int64_t p = static_cast<std::int64_t>(msb(mag));
    cpp_int m;
    if (p >= f.bm - 1) {
        const auto drop = static_cast<unsigned>(p - (f.bm - 1));
        m = mag >> drop;
        r.truncated = (m << drop) != mag;
    } else {
        m = mag << static_cast<unsigned>((f.bm - 1) - p);
    }
    // raw carries 2^(xe + we - 2*bias - 2*(BM-1)); leading one at p
    const std::int64_t e = p + xe + we - 2 * f.bias() - 2 * (f.bm - 1) + f.bias();
    const std::int64_t emax_fmt = (std::int64_t{1} << f.be) - 2;
    if (e > emax_fmt) {
        r.exponent = emax_fmt;
        r.mantissa = (std::uint64_t{1} << f.bm) - 1;
        r.overflow = true;
    } else if (e < 1) {
        const bool t = r.truncated;
        r = ScalarFp{};
        r.truncated = t;
        r.underflow = true;
    } else {
        r.exponent = e;
        r.mantissa = static_cast<std::uint64_t>(m);
    }
    return r;
}

// Exact real dot product of FP values, scaled by 2^(2*(bias + BM - 1)).
inline cpp_int exact_dot_scaled(const std::vector<FpValue>& w, const std::vector<FpValue>& x) {
    cpp_int s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].exponent == 0 || x[i].exponent == 0) continue;
        s += (signed_mantissa(w[i]) * signed_mantissa(x[i])) << static_cast<unsigned>(w[i].exponent + x[i].exponent);
    }
    return s;
}

inline cpp_int value_scaled(const FpValue& v, const FpFormat& f) {
    if (v.exponent == 0) return 0;
    return signed_mantissa(v) << static_cast<unsigned>(v.exponent + f.bias() + f.bm - 1);
}

// INT reference: plain sum of products on the selected row
inline std::vector<std::int64_t> int_mvm(const std::vector<std::uint64_t>& w, const std::vector<std::uint64_t>& x,
                                         std::int64_t outputs, std::int64_t rows, std::int64_t h, std::int64_t row) {
    std::vector<std::int64_t> y(static_cast<std::size_t>(outputs), 0);
    for (std::int64_t o = 0; o < outputs; ++o)
        for (std::int64_t i = 0; i < h; ++i)
            y[static_cast<std::size_t>(o)] += static_cast<std::int64_t>(w[static_cast<std::size_t>((o * rows + row) * h + i)] *
                                                                        x[static_cast<std::size_t>(i)]);
    return y;
}

// Random FP operand. `shared_exponent` > 0 pins the exponent and draws a
// mantissa with at most two significant bits.
template <class Rng>
FpValue random_fp(Rng& g, const FpFormat& f, std::int64_t shared_exponent = 0) {
    std::uniform_int_distribution<int> zero(0, 15);
    if (zero(g) == 0) return {1, 0, 0};
    FpValue v;
    v.sign = (g() & 1) ? -1 : 1;
    if (shared_exponent > 0) {
        v.exponent = static_cast<std::uint32_t>(shared_exponent);
        v.mantissa = std::uint64_t{1} << (f.bm - 1);
        if (f.bm >= 2 && (g() & 1)) v.mantissa |= std::uint64_t{1} << (f.bm - 2);
        return v;
    }
    std::uniform_int_distribution<std::int64_t> e(std::max<std::int64_t>(1, f.bias() - 6),
                                                  std::min<std::int64_t>(f.max_exponent(), f.bias() + 6));
    v.exponent = static_cast<std::uint32_t>(e(g));
    v.mantissa = (std::uint64_t{1} << (f.bm - 1)) | (g() & ((std::uint64_t{1} << (f.bm - 1)) - 1));
    return v;
}

}  // namespace oracle
