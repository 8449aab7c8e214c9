#pragma once

// Structural netlist generation for a DesignPoint from a fixed set of
// parameterized templates, and reconciliation of the result against the
// closed-form cost model.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcim/costmodel.hpp"
#include "dcim/funcsim.hpp"
#include "dcim/netlist.hpp"

namespace dcim::rtl {

inline const std::string top_name = "dcim_top";

namespace detail {

inline std::string num(std::int64_t v) { return std::to_string(v); }

class Generator {
public:
    explicit Generator(const DesignPoint& dp) : dp_(dp) {}

    Netlist run() {
        if (dp_.arch == Arch::int_multiply) build_int_top();
        else build_fp_top();
        Netlist nl;
        for (auto& [name, m] : modules_) nl.modules.push_back(std::move(m));
        nl.top = top_name;
        return nl;
    }

private:
    bool have(const std::string& name) const { return modules_.count(name) != 0; }
    void add(Module m) { modules_.emplace(m.name, std::move(m)); }

    // ripple adder: HA at bit 0, FA above; S has n+1 bits
    std::string adder(std::int64_t n) {
        const std::string name = "adder_w" + num(n);
        if (have(name)) return name;
        ModuleBuilder b(name);
        const auto a = b.input("A", static_cast<int>(n));
        const auto bb = b.input("B", static_cast<int>(n));
        const auto s = b.output("S", static_cast<int>(n + 1));
        b.set_timing_arc("add:" + num(n));
        Net carry = n == 1 ? s[1] : b.wire();
        b.cell(CellKind::ha, "u0", {a[0], bb[0]}, {s[0], carry});
        for (std::int64_t i = 1; i < n; ++i) {
            const Net co = i == n - 1 ? s[static_cast<std::size_t>(n)] : b.wire();
            b.cell(CellKind::fa, "u" + num(i), {a[static_cast<std::size_t>(i)], bb[static_cast<std::size_t>(i)], carry},
                   {s[static_cast<std::size_t>(i)], co});
            carry = co;
        }
        add(b.finish());
        return name;
    }

    // same carry chain as the adder; only the carry-out leaves the block
    std::string comparator(std::int64_t n) {
        const std::string name = "comparator_w" + num(n);
        if (have(name)) return name;
        ModuleBuilder b(name);
        const auto a = b.input("A", static_cast<int>(n));
        const auto bb = b.input("B", static_cast<int>(n));
        const auto gt = b.output("GT", 1);
        b.set_timing_arc("comp:" + num(n));
        Net carry = n == 1 ? gt[0] : b.wire();
        b.cell(CellKind::ha, "u0", {a[0], bb[0]}, {b.wire(), carry});
        for (std::int64_t i = 1; i < n; ++i) {
            const Net co = i == n - 1 ? gt[0] : b.wire();
            b.cell(CellKind::fa, "u" + num(i), {a[static_cast<std::size_t>(i)], bb[static_cast<std::size_t>(i)], carry},
                   {b.wire(), co});
            carry = co;
        }
        add(b.finish());
        return name;
    }

    // n:1 selector, pruned binary tree of n-1 MUX2; select bit j picks
    // between halves of size 2^j
    std::string mux(std::int64_t n) {
        const std::string name = "mux_n" + num(n);
        if (have(name)) return name;
        ModuleBuilder b(name);
        const auto d = b.input("D", static_cast<int>(n));
        const auto s = b.input("S", clog2(n));
        const auto y = b.output("Y", 1);
        b.set_timing_arc("sel:" + num(n));
        int counter = 0;
        std::function<Net(std::int64_t, std::int64_t, int, Net)> tree = [&](std::int64_t lo, std::int64_t size, int bit,
                                                                             Net out) -> Net {
            if (size == 1) return d[static_cast<std::size_t>(lo)];
            const std::int64_t half = std::int64_t{1} << bit;
            if (size <= half) return tree(lo, size, bit - 1, out);
            const Net left = tree(lo, half, bit - 1, -1);
            const Net right = tree(lo + half, size - half, bit - 1, -1);
            const Net o = out >= 0 ? out : b.wire();
            b.cell(CellKind::mux2, "m" + num(counter++), {left, right, s[static_cast<std::size_t>(bit)]}, {o});
            return o;
        };
        tree(0, n, clog2(n) - 1, y[0]);
        add(b.finish());
        return name;
    }

    // barrel shifter as n parallel n:1 selectors
    std::string shifter(std::int64_t n, bool left) {
        const std::string name = (left ? "shl_w" : "shr_w") + num(n);
        if (have(name)) return name;
        const std::string sel = mux(n);
        ModuleBuilder b(name);
        const auto a = b.input("A", static_cast<int>(n));
        const auto s = b.input("S", clog2(n));
        const auto y = b.output("Y", static_cast<int>(n));
        b.set_timing_arc("shift:" + num(n));
        for (std::int64_t j = 0; j < n; ++j) {
            Bus data;
            for (std::int64_t sh = 0; sh < n; ++sh) {
                const std::int64_t src = left ? j - sh : j + sh;
                data.push_back(src >= 0 && src < n ? a[static_cast<std::size_t>(src)] : const0);
            }
            b.instance("s" + num(j), sel, {{"D", data}, {"S", s}, {"Y", {y[static_cast<std::size_t>(j)]}}});
        }
        add(b.finish());
        return name;
    }

    // Instantiates an n:1 selector, or wires straight through when n == 1.
    void select(ModuleBuilder& b, const std::string& id, const Bus& data, const Bus& s, Net out) {
        if (data.size() == 1) {
            b.assign(out, data[0]);
            return;
        }
        b.instance(id, mux(static_cast<std::int64_t>(data.size())), {{"D", data}, {"S", s}, {"Y", {out}}});
    }

    // --- macro components -------------------------------------------------

    std::string sram_array() {
        const std::string name = "sram_array_h" + num(dp_.h) + "_l" + num(dp_.l);
        if (have(name)) return name;
        ModuleBuilder b(name);
        const auto qb = b.output("QB", static_cast<int>(dp_.h * dp_.l));  // [i*L + r]
        for (std::int64_t i = 0; i < dp_.h; ++i)
            for (std::int64_t r = 0; r < dp_.l; ++r)
                b.cell(CellKind::sram, "c_r" + num(r) + "_i" + num(i), {},
                       {b.wire(), qb[static_cast<std::size_t>(i * dp_.l + r)]});
        add(b.finish());
        return name;
    }

    // L:1 weight selector on the complemented bit lines, then k NOR cells:
    // NOR(~w, ~x) = w & x
    std::string compute_unit() {
        const std::string name = "compute_unit_l" + num(dp_.l) + "_k" + num(dp_.k);
        if (have(name)) return name;
        ModuleBuilder b(name);
        const auto qb = b.input("QB", static_cast<int>(dp_.l));
        const auto row = b.input("row_sel", clog2(dp_.l));
        const auto inb = b.input("INB", static_cast<int>(dp_.k));
        const auto p = b.output("P", static_cast<int>(dp_.k));
        const Net wb = b.wire();
        select(b, "wsel", qb, row, wb);
        for (std::int64_t j = 0; j < dp_.k; ++j)
            b.cell(CellKind::nor2, "mul" + num(j), {wb, inb[static_cast<std::size_t>(j)]}, {p[static_cast<std::size_t>(j)]});
        add(b.finish());
        return name;
    }

    std::string adder_tree() {
        const std::string name = "adder_tree_h" + num(dp_.h) + "_k" + num(dp_.k);
        if (have(name)) return name;
        const int stages = log2_exact(dp_.h);
        for (int i = 1; i <= stages; ++i) adder(dp_.k + i - 1);
        ModuleBuilder b(name);
        const auto in = b.input("P", static_cast<int>(dp_.h * dp_.k));
        const auto sum = b.output("SUM", static_cast<int>(dp_.k + stages));
        std::vector<Bus> level;
        for (std::int64_t i = 0; i < dp_.h; ++i) level.push_back(slice(in, i * dp_.k, dp_.k));
        for (int st = 1; st <= stages; ++st) {
            const std::int64_t w = dp_.k + st - 1;
            std::vector<Bus> next;
            for (std::size_t j = 0; j < level.size(); j += 2) {
                const Bus out = st == stages ? sum : b.wires(w + 1);
                b.instance("s" + num(st) + "_a" + num(static_cast<std::int64_t>(j / 2)), adder(w),
                           {{"A", level[j]}, {"B", level[j + 1]}, {"S", out}});
                next.push_back(out);
            }
            level = std::move(next);
        }
        if (stages == 0) b.assign(sum, level[0]);
        add(b.finish());
        return name;
    }

    // T <- shl(T + partial, sh); sh = k on every cycle but the last
    std::string shift_accumulator() {
        const std::int64_t r = dp_.acc_width();
        const std::int64_t pw = dp_.k + log2_exact(dp_.h);
        const std::string name = "shift_acc_r" + num(r) + "_p" + num(pw);
        if (have(name)) return name;
        const std::string add_t = adder(r);
        const std::string shl_t = r > 1 ? shifter(r, true) : "";
        ModuleBuilder b(name);
        const auto clk = b.input("clk", 1);
        const auto partial = b.input("P", static_cast<int>(pw));
        const auto sh = b.input("sh", clog2(r));
        const auto acc = b.output("ACC", static_cast<int>(r));
        const Bus sum = b.wires(r + 1);
        b.instance("add", add_t, {{"A", acc}, {"B", slice(partial, 0, r)}, {"S", sum}});
        Bus next = slice(sum, 0, r);
        if (r > 1) {
            next = b.wires(r);
            b.instance("shl", shl_t, {{"A", slice(sum, 0, r)}, {"S", sh}, {"Y", next}});
        }
        for (std::int64_t j = 0; j < r; ++j)
            b.cell(CellKind::dff, "t" + num(j), {clk[0], next[static_cast<std::size_t>(j)]},
                   {acc[static_cast<std::size_t>(j)], b.wire()}, std::string(stage_name(Stage::array_to_accu)));
        add(b.finish());
        return name;
    }

    std::string column() {
        const std::string name = "column_h" + num(dp_.h) + "_l" + num(dp_.l) + "_k" + num(dp_.k) + "_bx" + num(dp_.bx);
        if (have(name)) return name;
        const std::string array_t = sram_array(), unit_t = compute_unit(), tree_t = adder_tree(),
                          acc_t = shift_accumulator();
        const std::int64_t r = dp_.acc_width();
        ModuleBuilder b(name);
        const auto clk = b.input("clk", 1);
        const auto row = b.input("row_sel", clog2(dp_.l));
        const auto inb = b.input("INB", static_cast<int>(dp_.h * dp_.k));
        const auto sh = b.input("sh", clog2(r));
        const auto acc = b.output("ACC", static_cast<int>(r));
        const Bus qb = b.wires(dp_.h * dp_.l);
        b.instance("array", array_t, {{"QB", qb}});
        const Bus p = b.wires(dp_.h * dp_.k);
        for (std::int64_t i = 0; i < dp_.h; ++i)
            b.instance("cu" + num(i), unit_t,
                       {{"QB", slice(qb, i * dp_.l, dp_.l)},
                        {"row_sel", row},
                        {"INB", slice(inb, i * dp_.k, dp_.k)},
                        {"P", slice(p, i * dp_.k, dp_.k)}});
        const Bus sum = b.wires(dp_.k + log2_exact(dp_.h));
        b.instance("tree", tree_t, {{"P", p}, {"SUM", sum}});
        b.instance("accu", acc_t, {{"clk", clk}, {"P", sum}, {"sh", sh}, {"ACC", acc}});
        add(b.finish());
        return name;
    }

    // H*Bx registers; per slice bit a Bx/k:1 selector over register QN, so the
    // buffer hands out complemented slices. Cycle c reads bit Bx - k(c+1) + j.
    std::string input_buffer() {
        const std::int64_t cycles = dp_.cycles();
        const std::string name = "input_buffer_h" + num(dp_.h) + "_bx" + num(dp_.bx) + "_k" + num(dp_.k);
        if (have(name)) return name;
        ModuleBuilder b(name);
        const auto clk = b.input("clk", 1);
        const auto x = b.input("X", static_cast<int>(dp_.h * dp_.bx));
        const auto ss = b.input("slice_sel", clog2(cycles));
        const auto inb = b.output("INB", static_cast<int>(dp_.h * dp_.k));
        for (std::int64_t i = 0; i < dp_.h; ++i) {
            Bus qn;
            for (std::int64_t bit = 0; bit < dp_.bx; ++bit) {
                qn.push_back(b.wire());
                b.cell(CellKind::dff, "r" + num(i) + "_b" + num(bit), {clk[0], x[static_cast<std::size_t>(i * dp_.bx + bit)]},
                       {b.wire(), qn.back()}, std::string(stage_name(Stage::pre_array)));
            }
            for (std::int64_t j = 0; j < dp_.k; ++j) {
                Bus data;
                for (std::int64_t c = 0; c < cycles; ++c)
                    data.push_back(qn[static_cast<std::size_t>(dp_.bx - dp_.k * (c + 1) + j)]);
                select(b, "sel" + num(i) + "_" + num(j), data, ss, inb[static_cast<std::size_t>(i * dp_.k + j)]);
            }
        }
        add(b.finish());
        return name;
    }

    // Pairwise tree over the Bw column results; column b carries weight 2^b,
    // an odd item at any level passes through to the next one.
    std::string fusion() {
        const std::int64_t r = dp_.acc_width(), w = dp_.fused_width();
        const std::string name = "fusion_bw" + num(dp_.bw) + "_r" + num(r);
        if (have(name)) return name;
        if (dp_.bw > 1) adder(w);
        ModuleBuilder b(name);
        const auto acc = b.input("ACC", static_cast<int>(dp_.bw * r));
        const auto y = b.output("Y", static_cast<int>(w));
        struct Item {
            Bus bits;
            std::int64_t offset;
        };
        std::vector<Item> items;
        for (std::int64_t col = 0; col < dp_.bw; ++col) items.push_back({slice(slice(acc, col * r, r), 0, w), col});
        int level = 0;
        while (items.size() > 1) {
            ++level;
            std::vector<Item> next;
            for (std::size_t j = 0; j + 1 < items.size(); j += 2) {
                const auto& lo = items[j];
                const auto& hi = items[j + 1];
                const bool last = items.size() == 2;
                const Bus out = last ? concat(y, b.wires(1)) : b.wires(w + 1);
                b.instance("l" + num(level) + "_a" + num(static_cast<std::int64_t>(j / 2)), adder(w),
                           {{"A", lo.bits}, {"B", slice(hi.bits, lo.offset - hi.offset, w)}, {"S", out}});
                next.push_back({slice(out, 0, w), lo.offset});
            }
            if (items.size() % 2 == 1) next.push_back(items.back());
            items = std::move(next);
        }
        if (dp_.bw == 1) b.assign(y, items[0].bits);
        add(b.finish());
        return name;
    }

    // Comparator tree for the max exponent, then per input an offset
    // subtractor driving a BM-bit right shifter.
    std::string prealign() {
        const std::string name = "prealign_h" + num(dp_.h) + "_be" + num(dp_.be) + "_bm" + num(dp_.bm);
        if (have(name)) return name;
        const std::string comp_t = dp_.h > 1 ? comparator(dp_.be) : "", sub_t = adder(dp_.be), shr_t = shifter(dp_.bm, false);
        ModuleBuilder b(name);
        const auto xe = b.input("X_EXP", static_cast<int>(dp_.h * dp_.be));
        const auto xm = b.input("X_MAN", static_cast<int>(dp_.h * dp_.bm));
        const auto emax = b.output("EMAX", static_cast<int>(dp_.be));
        const auto man = b.output("MAN", static_cast<int>(dp_.h * dp_.bm));
        std::vector<Bus> level;
        for (std::int64_t i = 0; i < dp_.h; ++i) level.push_back(slice(xe, i * dp_.be, dp_.be));
        int lvl = 0;
        while (level.size() > 1) {
            ++lvl;
            std::vector<Bus> next;
            for (std::size_t j = 0; j < level.size(); j += 2) {
                const std::string id = "c" + num(lvl) + "_" + num(static_cast<std::int64_t>(j / 2));
                const Net gt = b.wire();
                b.instance(id, comp_t, {{"A", level[j]}, {"B", level[j + 1]}, {"GT", {gt}}});
                const Bus out = level.size() == 2 ? emax : b.wires(dp_.be);
                for (std::int64_t bit = 0; bit < dp_.be; ++bit)
                    b.cell(CellKind::mux2, id + "_m" + num(bit),
                           {level[j + 1][static_cast<std::size_t>(bit)], level[j][static_cast<std::size_t>(bit)], gt},
                           {out[static_cast<std::size_t>(bit)]});
                next.push_back(out);
            }
            level = std::move(next);
        }
        if (dp_.h == 1) b.assign(emax, level[0]);
        for (std::int64_t i = 0; i < dp_.h; ++i) {
            const Bus diff = b.wires(dp_.be + 1);
            b.instance("sub" + num(i), sub_t, {{"A", emax}, {"B", slice(xe, i * dp_.be, dp_.be)}, {"S", diff}});
            b.instance("shr" + num(i), shr_t,
                       {{"A", slice(xm, i * dp_.bm, dp_.bm)},
                        {"S", slice(diff, 0, clog2(dp_.bm))},
                        {"Y", slice(man, i * dp_.bm, dp_.bm)}});
        }
        add(b.finish());
        return name;
    }

    // Leading-one detect as an OR chain from the MSB (p_Br = 0), the
    // normalizing left shifter and the exponent adder hang off p.
    std::string converter() {
        const std::int64_t br = converter_width(dp_.bw, dp_.bm, dp_.h);
        const std::string name = "int2fp_br" + num(br) + "_be" + num(dp_.be) + "_bm" + num(dp_.bm);
        if (have(name)) return name;
        const std::string shl_t = shifter(br, true), add_t = adder(dp_.be);
        ModuleBuilder b(name);
        const auto v = b.input("V", static_cast<int>(br));
        const auto base = b.input("BASE", static_cast<int>(dp_.be));
        const auto sign = b.output("SIGN", 1);
        const auto exp = b.output("EXP", static_cast<int>(dp_.be));
        const auto man = b.output("MAN", static_cast<int>(dp_.bm));
        Bus p(static_cast<std::size_t>(br + 1));
        p[static_cast<std::size_t>(br)] = const0;
        for (std::int64_t i = br - 1; i >= 0; --i) {
            p[static_cast<std::size_t>(i)] = b.wire();
            b.cell(CellKind::or2, "lod" + num(i), {v[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i + 1)]},
                   {p[static_cast<std::size_t>(i)]});
        }
        const Bus norm = b.wires(br);
        b.instance("norm", shl_t, {{"A", v}, {"S", slice(p, 0, clog2(br))}, {"Y", norm}});
        b.assign(man, slice(norm, br - dp_.bm, dp_.bm));
        b.assign(sign[0], v[static_cast<std::size_t>(br - 1)]);
        const Bus e = b.wires(dp_.be + 1);
        b.instance("expadd", add_t, {{"A", base}, {"B", slice(p, 0, dp_.be)}, {"S", e}});
        b.assign(exp, slice(e, 0, dp_.be));
        add(b.finish());
        return name;
    }

    // Columns, fusion units and buffer shared by both tops. Returns the fused
    // output bus of each output group.
    std::vector<Bus> build_core(ModuleBuilder& b, const Bus& clk, const Bus& buffer_in, const Bus& row, const Bus& ss,
                                const Bus& sh) {
        const std::string buf_t = input_buffer(), col_t = column(), fus_t = fusion();
        const std::int64_t r = dp_.acc_width(), w = dp_.fused_width();
        const Bus inb = b.wires(dp_.h * dp_.k);
        b.instance("buffer", buf_t, {{"clk", clk}, {"X", buffer_in}, {"slice_sel", ss}, {"INB", inb}});
        std::vector<Bus> fused;
        for (std::int64_t o = 0; o < dp_.outputs(); ++o) {
            Bus accs;
            for (std::int64_t bit = 0; bit < dp_.bw; ++bit) {
                const Bus acc = b.wires(r);
                b.instance("col" + num(o * dp_.bw + bit), col_t,
                           {{"clk", clk}, {"row_sel", row}, {"INB", inb}, {"sh", sh}, {"ACC", acc}});
                accs = concat(accs, acc);
            }
            const Bus y = b.wires(w);
            b.instance("fuse" + num(o), fus_t, {{"ACC", accs}, {"Y", y}});
            fused.push_back(y);
        }
        return fused;
    }

    void build_int_top() {
        const std::int64_t w = dp_.fused_width();
        ModuleBuilder b(top_name);
        const auto clk = b.input("clk", 1);
        const auto x = b.input("x", static_cast<int>(dp_.h * dp_.bx));
        const auto row = b.input("row_sel", clog2(dp_.l));
        const auto ss = b.input("slice_sel", clog2(dp_.cycles()));
        const auto sh = b.input("acc_shift", clog2(dp_.acc_width()));
        const auto y = b.output("y", static_cast<int>(dp_.outputs() * w), std::string(stage_name(Stage::fusion_out)));
        const auto fused = build_core(b, clk, x, row, ss, sh);
        for (std::int64_t o = 0; o < dp_.outputs(); ++o) b.assign(slice(y, o * w, w), fused[static_cast<std::size_t>(o)]);
        add(b.finish());
    }

    void build_fp_top() {
        const std::string pre_t = prealign(), conv_t = converter();
        const std::int64_t groups = dp_.outputs();
        ModuleBuilder b(top_name);
        const auto clk = b.input("clk", 1);
        const auto xe = b.input("x_exp", static_cast<int>(dp_.h * dp_.be));
        const auto xm = b.input("x_man", static_cast<int>(dp_.h * dp_.bm));
        const auto row = b.input("row_sel", clog2(dp_.l));
        const auto ss = b.input("slice_sel", clog2(dp_.cycles()));
        const auto sh = b.input("acc_shift", clog2(dp_.acc_width()));
        const auto base = b.input("exp_base", static_cast<int>(groups * dp_.be));
        const auto emax = b.output("x_emax", dp_.be, std::string(stage_name(Stage::pre_array)));
        const auto ys = b.output("y_sign", static_cast<int>(groups), std::string(stage_name(Stage::fusion_out)));
        const auto ye = b.output("y_exp", static_cast<int>(groups * dp_.be), std::string(stage_name(Stage::fusion_out)));
        const auto ym = b.output("y_man", static_cast<int>(groups * dp_.bm), std::string(stage_name(Stage::fusion_out)));
        const Bus aligned = b.wires(dp_.h * dp_.bm);
        b.instance("prealign", pre_t, {{"X_EXP", xe}, {"X_MAN", xm}, {"EMAX", emax}, {"MAN", aligned}});
        const auto fused = build_core(b, clk, aligned, row, ss, sh);
        for (std::int64_t o = 0; o < groups; ++o)
            b.instance("conv" + num(o), conv_t,
                       {{"V", fused[static_cast<std::size_t>(o)]},
                        {"BASE", slice(base, o * dp_.be, dp_.be)},
                        {"SIGN", {ys[static_cast<std::size_t>(o)]}},
                        {"EXP", slice(ye, o * dp_.be, dp_.be)},
                        {"MAN", slice(ym, o * dp_.bm, dp_.bm)}});
        add(b.finish());
    }

    DesignPoint dp_;
    std::map<std::string, Module> modules_;
};

}  // namespace detail

inline Netlist generate_structural_netlist(const DesignPoint& dp) {
    require_valid(dp);
    return detail::Generator(dp).run();
}

// ---------------------------------------------------------------------------
// reconciliation

struct NetlistCosts {
    CellTally tally;
    Fixed area;
    Fixed energy;
    StageDelays stages;
};

inline NetlistCosts netlist_costs(const Netlist& nl, const TechLibrary& lib,
                                  TimingMode mode = TimingMode::characterized) {
    NetlistCosts c;
    c.tally = tally_cells(nl);
    c.area = c.tally.area(lib);
    c.energy = c.tally.energy(lib);
    const auto d = stage_delays(nl, lib, mode);
    c.stages = {d[0], d[1], d[2]};
    return c;
}

// ---------------------------------------------------------------------------
// behavioral check

inline std::string sram_path(const DesignPoint& dp, std::int64_t column, std::int64_t row, std::int64_t i) {
    (void)dp;
    return "col" + std::to_string(column) + "/array/c_r" + std::to_string(row) + "_i" + std::to_string(i);
}

// Runs the generated INT netlist cycle by cycle: one load edge for the
// input buffer, then one edge per input slice.
inline std::vector<std::int64_t> evaluate_int_netlist(const Netlist& nl, const DesignPoint& dp,
                                                      const sim::IntOperands& ops) {
    if (dp.arch != Arch::int_multiply) throw Error(ErrorCode::structural, "only integer netlists are evaluated");
    sim::check_shape(ops);
    if (ops.outputs != dp.outputs() || ops.rows != dp.l || ops.height != dp.h)
        throw Error(ErrorCode::invalid_shape, "operand shape does not match design " + design_tag(dp));
    Evaluator ev(flatten(nl));
    std::map<std::string, bool> bits;
    for (std::int64_t o = 0; o < dp.outputs(); ++o)
        for (int b = 0; b < dp.bw; ++b)
            for (std::int64_t r = 0; r < dp.l; ++r)
                for (std::int64_t i = 0; i < dp.h; ++i)
                    bits[sram_path(dp, o * dp.bw + b, r, i)] = (ops.weight(o, r, i) >> b) & 1u;
    ev.preload([&](const std::string& path) { return bits.at(path); });

    std::vector<std::uint8_t> x;
    for (std::int64_t i = 0; i < dp.h; ++i)
        for (int bit = 0; bit < dp.bx; ++bit) x.push_back((ops.inputs[static_cast<std::size_t>(i)] >> bit) & 1u);
    ev.set_port_bits("x", x);
    if (ev.has_port("row_sel")) ev.set_port("row_sel", static_cast<std::uint64_t>(ops.row));
    ev.step();  // load
    const std::int64_t cycles = dp.cycles();
    for (std::int64_t c = 0; c < cycles; ++c) {
        if (ev.has_port("slice_sel")) ev.set_port("slice_sel", static_cast<std::uint64_t>(c));
        if (ev.has_port("acc_shift")) ev.set_port("acc_shift", c + 1 < cycles ? static_cast<std::uint64_t>(dp.k) : 0);
        ev.step();
    }
    ev.settle();
    const auto y = ev.port_bits("y");
    const std::int64_t w = dp.fused_width();
    std::vector<std::int64_t> out;
    for (std::int64_t o = 0; o < dp.outputs(); ++o) {
        std::int64_t v = 0;
        for (std::int64_t bit = 0; bit < w; ++bit) v |= static_cast<std::int64_t>(y[static_cast<std::size_t>(o * w + bit)]) << bit;
        out.push_back(v);
    }
    return out;
}

}  // namespace dcim::rtl
