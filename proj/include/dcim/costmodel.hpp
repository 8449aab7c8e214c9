#pragma once

// Component- and macro-level cost models for the two DCIM architectures:
// multiply-based integer (NOR compute cells, bit-serial inputs, bit-sliced
// weights) and pre-aligned floating point (integer mantissa MAC between an
// exponent pre-alignment front end and an INT-to-FP converter).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcim/error.hpp"
#include "dcim/techlib.hpp"

namespace dcim {

enum class Arch { int_multiply, fp_prealigned };

inline constexpr std::string_view arch_name(Arch a) { return a == Arch::int_multiply ? "int" : "fp"; }

inline std::optional<Arch> arch_from_name(std::string_view s) {
    if (s == "int") return Arch::int_multiply;
    if (s == "fp") return Arch::fp_prealigned;
    return std::nullopt;
}

// Data-format preset. Mantissa widths include the hidden bit; for FP the
// weight width Bw is the weight mantissa width and Bx = BM.
struct Precision {
    std::string name;
    Arch arch = Arch::int_multiply;
    int bw = 0;
    int bx = 0;
    int be = 0;
    int bm = 0;

    int bias() const { return be > 0 ? (1 << (be - 1)) - 1 : 0; }
    bool operator==(const Precision&) const = default;
};

inline const std::vector<Precision>& precision_presets() {
    static const std::vector<Precision> presets = {
        {"INT2", Arch::int_multiply, 2, 2, 0, 0},    {"INT4", Arch::int_multiply, 4, 4, 0, 0},
        {"INT8", Arch::int_multiply, 8, 8, 0, 0},    {"INT16", Arch::int_multiply, 16, 16, 0, 0},
        {"FP8", Arch::fp_prealigned, 4, 4, 4, 4},    {"FP16", Arch::fp_prealigned, 11, 11, 5, 11},
        {"BF16", Arch::fp_prealigned, 8, 8, 8, 8},   {"FP32", Arch::fp_prealigned, 24, 24, 8, 24},
    };
    return presets;
}

inline std::optional<Precision> find_precision(std::string_view name) {
    for (const auto& p : precision_presets())
        if (p.name == name) return p;
    return std::nullopt;
}

struct DesignPoint {
    Arch arch = Arch::int_multiply;
    std::int64_t n = 0;  // columns
    std::int64_t h = 0;  // column height (adder-tree inputs)
    std::int64_t l = 0;  // weights sharing one compute unit
    std::int64_t k = 0;  // input bits per cycle
    int bw = 0;
    int bx = 0;
    int be = 0;  // FP only
    int bm = 0;  // FP only

    std::int64_t outputs() const { return n / bw; }
    std::int64_t cycles() const { return bx / k; }
    std::int64_t weights_stored() const { return n * h * l / bw; }
    // shift-accumulator width
    std::int64_t acc_width() const { return bx + log2_exact(h); }
    // fusion adder width, also the converter input width Br for FP
    std::int64_t fused_width() const { return bx + log2_exact(h) + bw; }

    bool operator==(const DesignPoint&) const = default;
};

inline DesignPoint make_design(const Precision& p, std::int64_t n, std::int64_t h, std::int64_t l,
                               std::int64_t k) {
    return {p.arch, n, h, l, k, p.bw, p.bx, p.be, p.bm};
}

// dp-tag used for output directories: arch_N{N}_H{H}_L{L}_k{k}_Bw{Bw}_Bx{Bx}
inline std::string design_tag(const DesignPoint& dp) {
    return std::string(arch_name(dp.arch)) + "_N" + std::to_string(dp.n) + "_H" + std::to_string(dp.h) + "_L" +
           std::to_string(dp.l) + "_k" + std::to_string(dp.k) + "_Bw" + std::to_string(dp.bw) + "_Bx" +
           std::to_string(dp.bx);
}

// Returns an empty string when dp satisfies every structural invariant.
inline std::string design_violation(const DesignPoint& dp) {
    if (dp.n < 1 || dp.h < 1 || dp.l < 1 || dp.k < 1 || dp.bw < 1 || dp.bx < 1)
        return "N, H, L, k, Bw, Bx must all be >= 1";
    if (!is_pow2(dp.h)) return "H must be a power of two";
    if (!is_pow2(dp.l)) return "L must be a power of two";
    if (dp.k > dp.bx) return "k must not exceed Bx";
    if (dp.bx % dp.k != 0) return "k must divide Bx";
    if (dp.n % dp.bw != 0) return "Bw must divide N";
    if (dp.arch == Arch::fp_prealigned) {
        if (dp.be < 1) return "FP exponent width BE must be >= 1";
        if (dp.bm < 2) return "FP mantissa width BM must be >= 2";
        if (dp.bx != dp.bm) return "FP designs need Bx == BM";
    }
    return {};
}

inline void require_valid(const DesignPoint& dp) {
    if (auto why = design_violation(dp); !why.empty())
        throw Error(ErrorCode::infeasible_point, "infeasible design " + design_tag(dp) + ": " + why);
}

// ---------------------------------------------------------------------------
// components

enum class ComponentKind {
    sram_array,
    compute_units,
    adder_tree,
    shift_accumulator,
    result_fusion,
    input_buffer,
    prealign,
    int_to_fp,
};

inline constexpr std::array<ComponentKind, 8> all_component_kinds = {
    ComponentKind::sram_array,   ComponentKind::compute_units, ComponentKind::adder_tree,
    ComponentKind::shift_accumulator, ComponentKind::result_fusion, ComponentKind::input_buffer,
    ComponentKind::prealign,     ComponentKind::int_to_fp};

inline constexpr std::string_view component_name(ComponentKind k) {
    switch (k) {
        case ComponentKind::sram_array: return "sram_array";
        case ComponentKind::compute_units: return "compute_units";
        case ComponentKind::adder_tree: return "adder_tree";
        case ComponentKind::shift_accumulator: return "shift_accumulator";
        case ComponentKind::result_fusion: return "result_fusion";
        case ComponentKind::input_buffer: return "input_buffer";
        case ComponentKind::prealign: return "prealign";
        case ComponentKind::int_to_fp: return "int_to_fp";
    }
    return "?";
}

struct ComponentCost {
    ComponentKind kind;
    Cost cost;
};

namespace detail {

inline void require_pow2(std::int64_t v, const char* what) {
    if (!is_pow2(v))
        throw Error(ErrorCode::invalid_shape, std::string(what) + " must be a power of two, got " + std::to_string(v));
}

inline void require_positive(std::int64_t v, const char* what) {
    if (v < 1) throw Error(ErrorCode::invalid_shape, std::string(what) + " must be >= 1, got " + std::to_string(v));
}

}  // namespace detail

// Stage i of log2(H) holds H/2^i adders of operand width k+i-1. Delay follows
// one adder per stage.
inline ComponentCost adder_tree_cost(const TechLibrary& lib, std::int64_t h, std::int64_t k) {
    detail::require_pow2(h, "adder tree height H");
    detail::require_positive(k, "adder tree input width k");
    Cost total;
    const int stages = log2_exact(h);
    for (int i = 1; i <= stages; ++i) {
        const auto add = adder_cost(lib, k + i - 1);
        total.area += add.area * (h >> i);
        total.energy += add.energy * (h >> i);
        total.delay += add.delay;
    }
    return {ComponentKind::adder_tree, total};
}

// R = Bx + log2 H registers, one R-bit barrel shifter and one R-bit adder.
inline ComponentCost shift_accumulator_cost(const TechLibrary& lib, std::int64_t bx, std::int64_t h) {
    detail::require_pow2(h, "column height H");
    detail::require_positive(bx, "input width Bx");
    const std::int64_t r = bx + log2_exact(h);
    const auto& dff = lib.cell(CellKind::dff);
    const auto shift = shifter_cost(lib, r);
    const auto add = adder_cost(lib, r);
    return {ComponentKind::shift_accumulator,
            {dff.area * r + shift.area + add.area, shift.delay + add.delay, dff.energy * r + shift.energy + add.energy}};
}

// Bw column results recombined by bit position: constant shifts are wiring,
// (Bw-1) adders of width W = Bx + log2 H + Bw in a balanced tree.
inline ComponentCost result_fusion_cost(const TechLibrary& lib, std::int64_t bw, std::int64_t bx, std::int64_t h) {
    detail::require_positive(bw, "weight width Bw");
    detail::require_positive(bx, "input width Bx");
    detail::require_pow2(h, "column height H");
    if (bw == 1) return {ComponentKind::result_fusion, {}};
    const std::int64_t w = bx + log2_exact(h) + bw;
    const auto add = adder_cost(lib, w);
    return {ComponentKind::result_fusion, {add.area * (bw - 1), add.delay * clog2(bw), add.energy * (bw - 1)}};
}

// Max-exponent comparison tree ((H-1) comparator + BE-mux nodes), then per
// input an offset subtractor and a BM-bit mantissa shifter.
inline ComponentCost prealign_cost(const TechLibrary& lib, std::int64_t h, std::int64_t be, std::int64_t bm) {
    detail::require_pow2(h, "column height H");
    detail::require_positive(be, "exponent width BE");
    detail::require_positive(bm, "mantissa width BM");
    const auto comp = logic_module_cost(lib, LogicKind::comparator, be);
    const auto& mux = lib.cell(CellKind::mux2);
    const auto sub = adder_cost(lib, be);
    const auto shift = shifter_cost(lib, bm);
    Cost c;
    c.area = (comp.area + mux.area * be) * (h - 1) + (sub.area + shift.area) * h;
    c.energy = (comp.energy + mux.energy * be) * (h - 1) + (sub.energy + shift.energy) * h;
    c.delay = (comp.delay + lib.delay(CellKind::mux2)) * log2_exact(h) + sub.delay + shift.delay;
    return {ComponentKind::prealign, c};
}

inline std::int64_t converter_width(std::int64_t bw, std::int64_t bm, std::int64_t h) {
    return bw + bm + log2_exact(h);
}

// Leading-one detect as a Br-long OR chain feeding the normalizing Br-bit
// shifter and the BE-bit exponent adder in parallel.
inline ComponentCost int2fp_converter_cost(const TechLibrary& lib, std::int64_t bw, std::int64_t bm, std::int64_t h,
                                           std::int64_t be) {
    detail::require_positive(bw, "weight width Bw");
    detail::require_positive(bm, "mantissa width BM");
    detail::require_pow2(h, "column height H");
    detail::require_positive(be, "exponent width BE");
    const std::int64_t br = converter_width(bw, bm, h);
    const auto shift = shifter_cost(lib, br);
    const auto add = adder_cost(lib, be);
    const auto& orc = lib.cell(CellKind::or2);
    return {ComponentKind::int_to_fp,
            {shift.area + add.area + orc.area * br, lib.delay(CellKind::or2) * br + max(shift.delay, add.delay),
             shift.energy + add.energy + orc.energy * br}};
}

// H*Bx input registers and H*k slice selectors of Bx/k inputs each.
inline ComponentCost input_buffer_cost(const TechLibrary& lib, std::int64_t h, std::int64_t bx, std::int64_t k) {
    detail::require_positive(h, "buffer height H");
    detail::require_positive(bx, "input width Bx");
    detail::require_positive(k, "slice width k");
    if (bx % k != 0) throw Error(ErrorCode::invalid_shape, "slice width k must divide Bx");
    const auto& dff = lib.cell(CellKind::dff);
    const auto sel = mux_cost(lib, bx / k);
    return {ComponentKind::input_buffer,
            {dff.area * (h * bx) + sel.area * (h * k), sel.delay, dff.energy * (h * bx) + sel.energy * (h * k)}};
}

// ---------------------------------------------------------------------------
// macro

struct CostVector {
    double area = 0;        // gate-equivalents
    double delay = 0;       // gate-delays
    double energy = 0;      // gate-energies per cycle
    double throughput = 0;  // operations per gate-delay

    bool operator==(const CostVector&) const = default;
};

// Pipeline stage delays; the clock period is their maximum.
struct StageDelays {
    Fixed pre_array;       // FP pre-alignment into the input buffer
    Fixed array_to_accu;   // buffer/SRAM through the adder tree into the accumulator
    Fixed fusion_out;      // accumulator through fusion (and converter) to the outputs

    Fixed critical() const { return max(pre_array, max(array_to_accu, fusion_out)); }
    bool operator==(const StageDelays&) const = default;
};

struct MacroBreakdown {
    DesignPoint design;
    std::vector<ComponentCost> components;  // replicated totals, delay per instance
    Fixed area;
    Fixed energy;  // per cycle, activity 1
    StageDelays stages;

    Fixed delay() const { return stages.critical(); }

    const Cost* component(ComponentKind kind) const {
        for (const auto& c : components)
            if (c.kind == kind) return &c.cost;
        return nullptr;
    }
};

inline double ops_per_cycle(const DesignPoint& dp) {
    return 2.0 * static_cast<double>(dp.outputs()) * static_cast<double>(dp.h) * static_cast<double>(dp.k) /
           static_cast<double>(dp.bx);
}

namespace detail {

inline MacroBreakdown core_breakdown(const TechLibrary& lib, const DesignPoint& dp) {
    MacroBreakdown m;
    m.design = dp;
    const auto& sram = lib.cell(CellKind::sram);
    const auto sel = mux_cost(lib, dp.l);
    const auto mul = logic_module_cost(lib, LogicKind::multiplier, dp.k);

    Cost array{sram.area * (dp.n * dp.h * dp.l), Fixed{}, sram.energy * (dp.n * dp.h * dp.l)};
    Cost units{(sel.area + mul.area) * (dp.n * dp.h), sel.delay + mul.delay, (sel.energy + mul.energy) * (dp.n * dp.h)};
    const auto tree = adder_tree_cost(lib, dp.h, dp.k).cost;
    const auto accu = shift_accumulator_cost(lib, dp.bx, dp.h).cost;
    const auto fusion = result_fusion_cost(lib, dp.bw, dp.bx, dp.h).cost;
    const auto buffer = input_buffer_cost(lib, dp.h, dp.bx, dp.k).cost;

    m.components = {
        {ComponentKind::sram_array, array},
        {ComponentKind::compute_units, units},
        {ComponentKind::adder_tree, tree.replicated(dp.n)},
        {ComponentKind::shift_accumulator, accu.replicated(dp.n)},
        {ComponentKind::result_fusion, fusion.replicated(dp.outputs())},
        {ComponentKind::input_buffer, buffer},
    };
    m.stages.array_to_accu = max(sel.delay, buffer.delay) + mul.delay + tree.delay + accu.delay;
    m.stages.fusion_out = fusion.delay;
    return m;
}

inline void total_up(MacroBreakdown& m) {
    m.area = {};
    m.energy = {};
    for (const auto& c : m.components) {
        m.area += c.cost.area;
        m.energy += c.cost.energy;
    }
}

}  // namespace detail

inline MacroBreakdown macro_breakdown(const TechLibrary& lib, const DesignPoint& dp) {
    require_valid(dp);
    auto m = detail::core_breakdown(lib, dp);
    if (dp.arch == Arch::fp_prealigned) {
        const auto alig = prealign_cost(lib, dp.h, dp.be, dp.bm).cost;
        const auto conv = int2fp_converter_cost(lib, dp.bw, dp.bm, dp.h, dp.be).cost;
        m.components.push_back({ComponentKind::prealign, alig});
        m.components.push_back({ComponentKind::int_to_fp, conv.replicated(dp.outputs())});
        m.stages.pre_array = alig.delay;
        m.stages.fusion_out = m.stages.fusion_out + conv.delay;
    }
    detail::total_up(m);
    return m;
}

inline CostVector to_cost_vector(const MacroBreakdown& m, double activity = 1.0) {
    CostVector v;
    v.area = m.area.to_double();
    v.delay = m.delay().to_double();
    v.energy = m.energy.to_double() * activity;
    v.throughput = ops_per_cycle(m.design) / v.delay;
    return v;
}

inline CostVector macro_cost_int(const TechLibrary& lib, const DesignPoint& dp, double activity = 1.0) {
    if (dp.arch != Arch::int_multiply)
        throw Error(ErrorCode::infeasible_point, "macro_cost_int needs an integer design");
    return to_cost_vector(macro_breakdown(lib, dp), activity);
}

inline CostVector macro_cost_fp(const TechLibrary& lib, const DesignPoint& dp, double activity = 1.0) {
    if (dp.arch != Arch::fp_prealigned)
        throw Error(ErrorCode::infeasible_point, "macro_cost_fp needs a floating-point design");
    return to_cost_vector(macro_breakdown(lib, dp), activity);
}

inline CostVector macro_cost(const TechLibrary& lib, const DesignPoint& dp, double activity = 1.0) {
    return to_cost_vector(macro_breakdown(lib, dp), activity);
}

// ---------------------------------------------------------------------------
// absolute units

struct AbsoluteMetrics {
    double area_um2 = 0;
    double delay_ps = 0;
    double energy_fj = 0;
    double tops_per_w = 0;
    double tops_per_mm2 = 0;
};

// energy per cycle in fJ, so ops/J = ops_per_cycle / (E * 1e-15) and
// TOPS/W = ops_per_cycle / E_fj * 1e3; TOPS = ops_per_cycle / delay_ps.
inline AbsoluteMetrics to_absolute(const CostVector& v, const Calibration& c) {
    AbsoluteMetrics a;
    a.area_um2 = v.area * c.area_um2_per_gate;
    a.delay_ps = v.delay * c.delay_ps_per_gate;
    a.energy_fj = v.energy * c.energy_fj_per_gate;
    const double ops = v.throughput * v.delay;
    a.tops_per_w = ops / a.energy_fj * 1e3;
    a.tops_per_mm2 = (ops / a.delay_ps) / (a.area_um2 * 1e-6);
    return a;
}

// Gate-normalized energy efficiency: operations per gate-energy.
inline double ops_per_energy(const CostVector& v) { return v.throughput * v.delay / v.energy; }

}  // namespace dcim
