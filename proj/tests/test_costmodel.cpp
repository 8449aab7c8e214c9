#include <catch_amalgamated.hpp>

#include "dcim/costmodel.hpp"

using namespace dcim;

namespace {
Fixed fx(const char* s) { return *Fixed::parse(s); }
const Precision& prec(const char* name) {
    static std::vector<Precision> keep;
    keep.push_back(*find_precision(name));
    return keep.back();
}
}  // namespace

TEST_CASE("component worked examples") {
    TechLibrary lib;
    CHECK(adder_tree_cost(lib, 4, 2).cost.area == fx("35.7"));
    CHECK(shift_accumulator_cost(lib, 8, 16).cost.area == fx("436.6"));
    // tree delay: one adder per stage, widths 2 then 3
    CHECK(adder_tree_cost(lib, 4, 2).cost.delay == adder_cost(lib, 2).delay + adder_cost(lib, 3).delay);
    CHECK(adder_tree_cost(lib, 1, 4).cost == Cost{});
    CHECK(result_fusion_cost(lib, 1, 8, 4).cost == Cost{});
    const auto fu = result_fusion_cost(lib, 8, 8, 16).cost;
    CHECK(fu.area == adder_cost(lib, 20).area * 7);
    CHECK(fu.delay == adder_cost(lib, 20).delay * 3);
}

TEST_CASE("component shape errors") {
    TechLibrary lib;
    CHECK_THROWS_AS(adder_tree_cost(lib, 3, 1), Error);
    CHECK_THROWS_AS(shift_accumulator_cost(lib, 8, 6), Error);
    CHECK_THROWS_AS(input_buffer_cost(lib, 4, 8, 3), Error);
    CHECK_THROWS_AS(prealign_cost(lib, 4, 0, 8), Error);
}

TEST_CASE("macro totals are the sum of components") {
    TechLibrary lib;
    for (const char* p : {"INT4", "INT8", "BF16", "FP16"}) {
        const auto& pr = prec(p);
        const auto dp = make_design(pr, pr.bw * 8, 16, 4, 1);
        const auto m = macro_breakdown(lib, dp);
        Fixed a, e;
        for (const auto& c : m.components) {
            a += c.cost.area;
            e += c.cost.energy;
        }
        CHECK(m.area == a);
        CHECK(m.energy == e);
        CHECK(m.delay() == max(m.stages.pre_array, max(m.stages.array_to_accu, m.stages.fusion_out)));
        CHECK((m.component(ComponentKind::prealign) != nullptr) == (pr.arch == Arch::fp_prealigned));
    }
}

TEST_CASE("INT macro by hand") {
    TechLibrary lib;
    // N=2 (Bw=1), H=2, L=2, k=1, Bx=1
    const DesignPoint dp{Arch::int_multiply, 2, 2, 2, 1, 1, 1, 0, 0};
    const auto m = macro_breakdown(lib, dp);
    // sram 8*2.2, units 4*(mux2 + nor), tree 2*HA, accu 2*(2 dff + shifter(2) + adder(2)), buffer 2 dff
    const Fixed sram = fx("17.6"), units = (fx("2.2") + fx("1")) * 4, tree = fx("4.3") * 2;
    const Fixed accu = (fx("6.6") * 2 + fx("2.2") * 2 + fx("10")) * 2, buffer = fx("6.6") * 2;
    CHECK(m.area == sram + units + tree + accu + buffer);
    // stage: max(sel(2), sel(1)) + nor + HA + shifter(2) + adder(2)
    CHECK(m.stages.array_to_accu == fx("2.2") + fx("1") + fx("2.5") + fx("2.2") + fx("5.8"));
    CHECK(m.stages.fusion_out == Fixed{});
    CHECK(m.stages.pre_array == Fixed{});
}

TEST_CASE("cost vector and throughput") {
    TechLibrary lib;
    const auto dp = make_design(prec("INT8"), 64, 16, 8, 2);
    const auto v = macro_cost(lib, dp);
    const auto m = macro_breakdown(lib, dp);
    CHECK(v.area == m.area.to_double());
    CHECK(v.delay == m.delay().to_double());
    CHECK(v.throughput == Catch::Approx(2.0 * 8 * 16 * 2 / 8 / v.delay));
    CHECK(macro_cost(lib, dp, 0.5).energy == Catch::Approx(v.energy / 2));
    CHECK_THROWS_AS(macro_cost_fp(lib, dp), Error);
    CHECK(macro_cost_int(lib, dp) == v);
}

TEST_CASE("monotonicity in the design parameters") {
    TechLibrary lib;
    const auto& p = prec("INT8");
    const auto base = macro_cost(lib, make_design(p, 64, 16, 8, 2));
    CHECK(macro_cost(lib, make_design(p, 128, 16, 8, 2)).area > base.area);
    CHECK(macro_cost(lib, make_design(p, 64, 32, 8, 2)).area > base.area);
    CHECK(macro_cost(lib, make_design(p, 64, 16, 16, 2)).area > base.area);
    CHECK(macro_cost(lib, make_design(p, 64, 16, 8, 4)).throughput > base.throughput);
}

TEST_CASE("design validation") {
    const auto& p = prec("INT8");
    CHECK(design_violation(make_design(p, 64, 16, 8, 2)).empty());
    CHECK_FALSE(design_violation(make_design(p, 64, 12, 8, 2)).empty());
    CHECK_FALSE(design_violation(make_design(p, 64, 16, 8, 3)).empty());
    CHECK_FALSE(design_violation(make_design(p, 60, 16, 8, 2)).empty());
    CHECK_FALSE(design_violation(make_design(p, 64, 16, 8, 16)).empty());
    try {
        macro_breakdown(TechLibrary{}, make_design(p, 64, 16, 6, 2));
        FAIL("expected infeasible_point");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::infeasible_point);
    }
    CHECK(design_tag(make_design(p, 64, 16, 8, 2)) == "int_N64_H16_L8_k2_Bw8_Bx8");
}

TEST_CASE("absolute units") {
    const CostVector v{100, 10, 50, 2};
    const auto a = to_absolute(v, Calibration{0.5, 20, 0.1});
    CHECK(a.area_um2 == 50);
    CHECK(a.delay_ps == 200);
    CHECK(a.energy_fj == 5);
    CHECK(a.tops_per_w == Catch::Approx(20.0 / 5 * 1e3));
    CHECK(ops_per_energy(v) == Catch::Approx(20.0 / 50));
}
