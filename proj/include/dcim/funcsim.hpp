#pragma once

// Bit-accurate model of the DCIM dataflow: MSB-first k-bit input slices,
// one weight bit per column, per-column adder tree and shift accumulator,
// result fusion by bit position. The FP path pre-aligns inputs (online) and
// weights (offline) to their group maximum exponent, runs the same integer
// machinery on two's-complement mantissas and normalizes the wide result.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dcim/costmodel.hpp"
#include "dcim/error.hpp"

namespace dcim::sim {

// ---------------------------------------------------------------------------
// integer operands

struct IntOperands {
    std::int64_t outputs = 0;  // N / Bw
    std::int64_t rows = 0;     // L
    std::int64_t height = 0;   // H
    std::vector<std::uint64_t> weights;  // [output][row][i]
    std::vector<std::uint64_t> inputs;   // [i]
    std::int64_t row = 0;                // selected row r

    IntOperands() = default;
    IntOperands(std::int64_t outputs_, std::int64_t rows_, std::int64_t height_)
        : outputs(outputs_), rows(rows_), height(height_),
          weights(static_cast<std::size_t>(outputs_ * rows_ * height_), 0),
          inputs(static_cast<std::size_t>(height_), 0) {}

    std::uint64_t& weight(std::int64_t o, std::int64_t r, std::int64_t i) {
        return weights[static_cast<std::size_t>((o * rows + r) * height + i)];
    }
    std::uint64_t weight(std::int64_t o, std::int64_t r, std::int64_t i) const {
        return weights[static_cast<std::size_t>((o * rows + r) * height + i)];
    }
};

inline void check_shape(const IntOperands& ops) {
    if (ops.outputs < 1 || ops.rows < 1 || ops.height < 1)
        throw Error(ErrorCode::invalid_shape, "operand dimensions must be positive");
    if (ops.weights.size() != static_cast<std::size_t>(ops.outputs * ops.rows * ops.height) ||
        ops.inputs.size() != static_cast<std::size_t>(ops.height))
        throw Error(ErrorCode::invalid_shape, "operand storage does not match its dimensions");
    if (ops.row < 0 || ops.row >= ops.rows) throw Error(ErrorCode::invalid_shape, "row select out of range");
}

// Reference matrix-vector product of the selected row.
inline std::vector<std::int64_t> exact_int_mvm(const IntOperands& ops) {
    check_shape(ops);
    std::vector<std::int64_t> y(static_cast<std::size_t>(ops.outputs));
    for (std::int64_t o = 0; o < ops.outputs; ++o) {
        __int128 acc = 0;
        for (std::int64_t i = 0; i < ops.height; ++i)
            acc += static_cast<__int128>(ops.weight(o, ops.row, i)) * static_cast<__int128>(ops.inputs[i]);
        if (acc > std::numeric_limits<std::int64_t>::max())
            throw Error(ErrorCode::invalid_width, "dot product exceeds 63 bits");
        y[static_cast<std::size_t>(o)] = static_cast<std::int64_t>(acc);
    }
    return y;
}

// ---------------------------------------------------------------------------
// trace

struct CycleRecord {
    std::int64_t cycle = 0;
    std::vector<std::int64_t> slices;       // per input i
    std::vector<std::int64_t> partials;     // per column
    std::vector<std::int64_t> accumulators; // per column, after the update
};

struct SimTrace {
    std::vector<CycleRecord> cycles;
    std::vector<std::int64_t> outputs;
};

// One line per (cycle, column): cycle,col,partial,acc
inline void dump_trace(std::ostream& os, const SimTrace& trace) {
    os << "# cycle,col,partial,acc\n";
    for (const auto& c : trace.cycles)
        for (std::size_t col = 0; col < c.partials.size(); ++col)
            os << c.cycle << ',' << col << ',' << c.partials[col] << ',' << c.accumulators[col] << '\n';
    os << "# outputs";
    for (auto y : trace.outputs) os << ',' << y;
    os << '\n';
}

namespace detail {

// Bit-serial engine shared by both data paths.
//   weights: [output][i], width weight_bits; when is_signed they are two's
//            complement and the top plane carries weight -2^(weight_bits-1)
//   inputs:  [i], magnitude below 2^input_bits; when is_signed each slice is
//            taken from |x| and carries the sign of x into the tree
// Inputs are consumed MSB-first, k bits per cycle.
inline SimTrace bit_serial_mvm(std::span<const std::int64_t> weights, std::span<const std::int64_t> inputs,
                               std::int64_t outputs, int weight_bits, int input_bits, int k, bool is_signed) {
    const auto height = static_cast<std::int64_t>(inputs.size());
    const int cycles = input_bits / k;
    const std::int64_t columns = outputs * weight_bits;
    const std::uint64_t slice_mask = (std::uint64_t{1} << k) - 1;

    auto weight_bit = [&](std::int64_t o, std::int64_t i, int b) -> std::int64_t {
        const auto bits = static_cast<std::uint64_t>(weights[static_cast<std::size_t>(o * height + i)]);
        return static_cast<std::int64_t>((bits >> b) & 1u);
    };

    SimTrace trace;
    std::vector<std::int64_t> acc(static_cast<std::size_t>(columns), 0);
    for (int c = 0; c < cycles; ++c) {
        CycleRecord rec;
        rec.cycle = c;
        const int lsb = input_bits - k * (c + 1);
        for (std::int64_t i = 0; i < height; ++i) {
            const std::int64_t x = inputs[static_cast<std::size_t>(i)];
            const auto mag = static_cast<std::uint64_t>(x < 0 ? -x : x);
            const auto slice = static_cast<std::int64_t>((mag >> lsb) & slice_mask);
            rec.slices.push_back(x < 0 ? -slice : slice);
        }
        rec.partials.assign(static_cast<std::size_t>(columns), 0);
        for (std::int64_t o = 0; o < outputs; ++o)
            for (int b = 0; b < weight_bits; ++b) {
                const auto col = static_cast<std::size_t>(o * weight_bits + b);
                std::int64_t partial = 0;
                for (std::int64_t i = 0; i < height; ++i)
                    partial += weight_bit(o, i, b) * rec.slices[static_cast<std::size_t>(i)];
                rec.partials[col] = partial;
                acc[col] = acc[col] * (std::int64_t{1} << k) + partial;
            }
        rec.accumulators = acc;
        trace.cycles.push_back(std::move(rec));
    }
    for (std::int64_t o = 0; o < outputs; ++o) {
        std::int64_t y = 0;
        for (int b = 0; b < weight_bits; ++b) {
            const std::int64_t col = acc[static_cast<std::size_t>(o * weight_bits + b)];
            const std::int64_t scaled = col * (std::int64_t{1} << b);
            y += (is_signed && b == weight_bits - 1) ? -scaled : scaled;
        }
        trace.outputs.push_back(y);
    }
    return trace;
}

}  // namespace detail

inline SimTrace simulate_int_dcim(const DesignPoint& dp, const IntOperands& ops) {
    require_valid(dp);
    check_shape(ops);
    if (ops.outputs != dp.outputs() || ops.rows != dp.l || ops.height != dp.h)
        throw Error(ErrorCode::invalid_shape, "operand shape does not match design " + design_tag(dp));
    if (dp.bw > 32 || dp.bx > 32) throw Error(ErrorCode::invalid_width, "simulator supports widths up to 32 bits");
    const std::uint64_t wlim = std::uint64_t{1} << dp.bw, xlim = std::uint64_t{1} << dp.bx;
    for (auto w : ops.weights)
        if (w >= wlim) throw Error(ErrorCode::invalid_width, "weight exceeds Bw bits");
    for (auto x : ops.inputs)
        if (x >= xlim) throw Error(ErrorCode::invalid_width, "input exceeds Bx bits");

    std::vector<std::int64_t> selected;
    selected.reserve(static_cast<std::size_t>(ops.outputs * ops.height));
    for (std::int64_t o = 0; o < ops.outputs; ++o)
        for (std::int64_t i = 0; i < ops.height; ++i)
            selected.push_back(static_cast<std::int64_t>(ops.weight(o, ops.row, i)));
    std::vector<std::int64_t> inputs(ops.inputs.begin(), ops.inputs.end());
    return detail::bit_serial_mvm(selected, inputs, ops.outputs, dp.bw, dp.bx, static_cast<int>(dp.k), false);
}

// ---------------------------------------------------------------------------
// floating point

struct FpFormat {
    int be = 0;
    int bm = 0;  // including the hidden bit

    int bias() const { return (1 << (be - 1)) - 1; }
    std::int64_t max_exponent() const { return (std::int64_t{1} << be) - 2; }
    bool operator==(const FpFormat&) const = default;
};

inline FpFormat format_of(const DesignPoint& dp) { return {dp.be, dp.bm}; }

// value = sign * mantissa * 2^(exponent - bias - (BM-1)); exponent 0 is zero.
struct FpValue {
    int sign = 1;
    std::uint32_t exponent = 0;
    std::uint64_t mantissa = 0;

    bool is_zero() const { return exponent == 0; }
    std::int64_t signed_mantissa() const {
        return is_zero() ? 0 : sign * static_cast<std::int64_t>(mantissa);
    }
    bool operator==(const FpValue&) const = default;
};

inline FpValue fp_zero() { return {1, 0, 0}; }

inline bool well_formed(const FpValue& v, const FpFormat& f) {
    if (v.sign != 1 && v.sign != -1) return false;
    if (v.exponent == 0) return v.mantissa == 0;
    return v.exponent <= static_cast<std::uint32_t>((1u << f.be) - 1) &&
           v.mantissa >> (f.bm - 1) == 1;  // hidden bit set, nothing above it
}

inline double to_double(const FpValue& v, const FpFormat& f) {
    if (v.is_zero()) return 0.0;
    return v.sign * std::ldexp(static_cast<double>(v.mantissa),
                               static_cast<int>(v.exponent) - f.bias() - (f.bm - 1));
}

struct FpFlags {
    bool truncated = false;
    bool overflow = false;
    bool underflow = false;

    bool any() const { return truncated || overflow || underflow; }
    bool operator==(const FpFlags&) const = default;
};

// floor(v / 2^s)
inline std::int64_t floor_shift(std::int64_t v, std::int64_t s) {
    if (s <= 0) return v;
    if (s >= 63) return v < 0 ? -1 : 0;
    return v >> s;
}

struct Alignment {
    std::int64_t emax = 0;
    std::vector<std::int64_t> aligned;  // signed, magnitude below 2^BM
    std::vector<bool> truncated;
};

// Max exponent over the group, then each signed mantissa shifted right by its
// exponent offset with floor rounding.
inline Alignment prealign_inputs(std::span<const FpValue> xs) {
    Alignment a;
    for (const auto& x : xs) a.emax = std::max<std::int64_t>(a.emax, x.exponent);
    for (const auto& x : xs) {
        const std::int64_t m = x.signed_mantissa();
        const std::int64_t shift = a.emax - x.exponent;
        const std::int64_t out = floor_shift(m, shift);
        const bool lost = shift >= 63 ? m != 0 : (out * (std::int64_t{1} << shift)) != m;
        a.aligned.push_back(out);
        a.truncated.push_back(lost);
    }
    return a;
}

struct Converted {
    FpValue value;
    FpFlags flags;
};

// Normalizes a signed integer: leading-one position p gives exponent base+p,
// the mantissa keeps the top BM bits (round toward zero).
inline Converted int_to_fp_convert(std::int64_t raw, std::int64_t exponent_base, const FpFormat& fmt) {
    Converted out{fp_zero(), {}};
    if (raw == 0) return out;
    const int sign = raw < 0 ? -1 : 1;
    const auto mag = static_cast<std::uint64_t>(raw < 0 ? -raw : raw);
    const int p = std::bit_width(mag) - 1;
    std::uint64_t m;
    if (p >= fmt.bm - 1) {
        const int drop = p - (fmt.bm - 1);
        m = mag >> drop;
        out.flags.truncated = (m << drop) != mag;
    } else {
        m = mag << ((fmt.bm - 1) - p);
    }
    const std::int64_t e = exponent_base + p;
    if (e > fmt.max_exponent()) {
        out.value = {sign, static_cast<std::uint32_t>(fmt.max_exponent()), (std::uint64_t{1} << fmt.bm) - 1};
        out.flags.overflow = true;
    } else if (e < 1) {
        out.value = fp_zero();
        out.flags.underflow = true;
    } else {
        out.value = {sign, static_cast<std::uint32_t>(e), m};
    }
    return out;
}

struct FpWeights {
    std::int64_t outputs = 0;
    std::int64_t rows = 0;
    std::int64_t height = 0;
    std::vector<FpValue> values;  // [output][row][i]

    FpWeights() = default;
    FpWeights(std::int64_t outputs_, std::int64_t rows_, std::int64_t height_)
        : outputs(outputs_), rows(rows_), height(height_),
          values(static_cast<std::size_t>(outputs_ * rows_ * height_), fp_zero()) {}

    FpValue& at(std::int64_t o, std::int64_t r, std::int64_t i) {
        return values[static_cast<std::size_t>((o * rows + r) * height + i)];
    }
    const FpValue& at(std::int64_t o, std::int64_t r, std::int64_t i) const {
        return values[static_cast<std::size_t>((o * rows + r) * height + i)];
    }
};

struct FpResult {
    std::vector<FpValue> outputs;
    std::vector<FpFlags> flags;              // converter flags per output
    std::vector<std::int64_t> raw;           // integer MAC result per output
    std::vector<std::int64_t> exponent_base; // converter exponent base per output
    std::int64_t x_emax = 0;
    std::vector<std::int64_t> w_emax;
    bool inputs_truncated = false;
    std::vector<bool> weights_truncated;     // per output group
    SimTrace trace;
};

// Converter exponent base for a group. The product of two aligned mantissas
// carries scale 2^(X_Emax + W_Emax - 2*bias - 2*(BM-1)); re-biasing into the
// output format adds bias back, and the leading-one position adds p.
inline std::int64_t exponent_base(std::int64_t x_emax, std::int64_t w_emax, const FpFormat& f) {
    return x_emax + w_emax - 2 * f.bias() + (f.bias() - 2 * (f.bm - 1));
}

inline FpResult simulate_fp_dcim(const DesignPoint& dp, const FpWeights& weights, std::span<const FpValue> xs,
                                 std::int64_t row = 0) {
    require_valid(dp);
    if (dp.arch != Arch::fp_prealigned) throw Error(ErrorCode::invalid_shape, "simulate_fp_dcim needs an FP design");
    if (weights.outputs != dp.outputs() || weights.rows != dp.l || weights.height != dp.h ||
        weights.values.size() != static_cast<std::size_t>(weights.outputs * weights.rows * weights.height) ||
        static_cast<std::int64_t>(xs.size()) != dp.h)
        throw Error(ErrorCode::invalid_shape, "operand shape does not match design " + design_tag(dp));
    if (row < 0 || row >= dp.l) throw Error(ErrorCode::invalid_shape, "row select out of range");
    if (dp.bm > 30) throw Error(ErrorCode::invalid_width, "simulator supports mantissas up to 30 bits");
    const FpFormat fmt = format_of(dp);
    for (const auto& x : xs)
        if (!well_formed(x, fmt)) throw Error(ErrorCode::invalid_width, "malformed FP input");
    for (const auto& w : weights.values)
        if (!well_formed(w, fmt)) throw Error(ErrorCode::invalid_width, "malformed FP weight");

    FpResult res;
    const auto xa = prealign_inputs(xs);
    res.x_emax = xa.emax;
    for (bool t : xa.truncated) res.inputs_truncated = res.inputs_truncated || t;

    std::vector<std::int64_t> wa;
    wa.reserve(static_cast<std::size_t>(dp.outputs() * dp.h));
    for (std::int64_t o = 0; o < dp.outputs(); ++o) {
        std::vector<FpValue> group;
        for (std::int64_t i = 0; i < dp.h; ++i) group.push_back(weights.at(o, row, i));
        const auto aligned = prealign_inputs(group);  // offline alignment, same rule
        res.w_emax.push_back(aligned.emax);
        bool lost = false;
        for (bool t : aligned.truncated) lost = lost || t;
        res.weights_truncated.push_back(lost);
        wa.insert(wa.end(), aligned.aligned.begin(), aligned.aligned.end());
    }

    // weights: two's-complement planes, one extra (sign) column per group;
    // inputs: sign-magnitude slices, so the cycle count stays Bx/k
    res.trace = detail::bit_serial_mvm(wa, xa.aligned, dp.outputs(), dp.bw + 1, dp.bx, static_cast<int>(dp.k), true);
    for (std::int64_t o = 0; o < dp.outputs(); ++o) {
        const std::int64_t raw = res.trace.outputs[static_cast<std::size_t>(o)];
        const std::int64_t base = exponent_base(xa.emax, res.w_emax[static_cast<std::size_t>(o)], fmt);
        const auto conv = int_to_fp_convert(raw, base, fmt);
        res.raw.push_back(raw);
        res.exponent_base.push_back(base);
        res.outputs.push_back(conv.value);
        res.flags.push_back(conv.flags);
    }
    return res;
}

}  // namespace dcim::sim
