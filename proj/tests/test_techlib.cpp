#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dcim/keyvalue.hpp"
#include "dcim/techlib.hpp"

using namespace dcim;

namespace {
Fixed fx(const char* s) { return *Fixed::parse(s); }
}

TEST_CASE("Fixed parses and prints exact decimals") {
    CHECK(fx("5.7").raw() == 57000);
    CHECK(fx("-0.25").str() == "-0.25");
    CHECK(fx("12").str() == "12");
    CHECK((fx("0.1") + fx("0.2")) == fx("0.3"));
    CHECK_FALSE(Fixed::parse("1.23456"));
    CHECK_FALSE(Fixed::parse("abc"));
    CHECK_FALSE(Fixed::parse(""));
}

TEST_CASE("default cell table") {
    TechLibrary lib;
    struct Row {
        CellKind k;
        const char *a, *d, *e;
    };
    const Row rows[] = {
        {CellKind::nor2, "1", "1", "1"},   {CellKind::or2, "1.3", "1", "2.3"}, {CellKind::mux2, "2.2", "2.2", "3"},
        {CellKind::ha, "4.3", "2.5", "6.9"}, {CellKind::fa, "5.7", "3.3", "8.4"}, {CellKind::sram, "2.2", "0", "0"},
    };
    for (const auto& r : rows) {
        const auto& c = cell_cost(lib, r.k);
        CHECK(c.area == fx(r.a));
        CHECK(c.delay == fx(r.d));
        CHECK(c.energy == fx(r.e));
    }
    const auto& dff = cell_cost(lib, CellKind::dff);
    CHECK(dff.area == fx("6.6"));
    CHECK_FALSE(dff.delay.has_value());
    CHECK(dff.energy == fx("9.6"));
    CHECK(lib.delay(CellKind::dff) == Fixed{});
}

TEST_CASE("logic modules: worked examples") {
    TechLibrary lib;
    const auto add8 = adder_cost(lib, 8);
    CHECK(add8.area == fx("44.2"));
    CHECK(add8.delay == fx("25.6"));
    CHECK(add8.energy == fx("65.7"));

    const auto sh4 = shifter_cost(lib, 4);
    CHECK(sh4.area == fx("26.4"));
    CHECK(sh4.delay == fx("8.8"));
    CHECK(sh4.energy == fx("36"));

    const auto mul3 = logic_module_cost(lib, LogicKind::multiplier, 3);
    CHECK(mul3.area == fx("3"));
    CHECK(mul3.delay == fx("1"));
    CHECK(mul3.energy == fx("3"));

    CHECK(logic_module_cost(lib, LogicKind::comparator, 5) == adder_cost(lib, 5));
    CHECK(mux_cost(lib, 1) == Cost{});
    CHECK(adder_cost(lib, 1).area == fx("4.3"));
}

TEST_CASE("logic modules: hand arithmetic over widths 1..64") {
    TechLibrary lib;
    for (std::int64_t n = 1; n <= 64; ++n) {
        int lg = 0;
        while ((1 << lg) < n) ++lg;
        // integer tenths
        const std::int64_t add_a = 57 * (n - 1) + 43, add_d = 33 * (n - 1) + 25, add_e = 84 * (n - 1) + 69;
        const std::int64_t mux_a = 22 * (n - 1), mux_d = 22 * lg, mux_e = 30 * (n - 1);
        CHECK(adder_cost(lib, n) == Cost{Fixed::ratio(add_a, 10), Fixed::ratio(add_d, 10), Fixed::ratio(add_e, 10)});
        CHECK(mux_cost(lib, n) == Cost{Fixed::ratio(mux_a, 10), Fixed::ratio(mux_d, 10), Fixed::ratio(mux_e, 10)});
        CHECK(shifter_cost(lib, n) ==
              Cost{Fixed::ratio(mux_a * n, 10), Fixed::ratio(mux_d * lg, 10), Fixed::ratio(mux_e * n, 10)});
        CHECK(logic_module_cost(lib, LogicKind::multiplier, n) ==
              Cost{Fixed::from_int(n), Fixed::from_int(1), Fixed::from_int(n)});
    }
}

TEST_CASE("logic modules reject width 0") {
    TechLibrary lib;
    try {
        adder_cost(lib, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_width);
    }
    CHECK(logic_from_name("shift") == LogicKind::shifter);
    CHECK_FALSE(logic_from_name("divider"));
}

TEST_CASE("tech library override file") {
    const auto lib = load_tech_library(kv::parse("cell.FA.area = 6\ncalib.area_um2 = 0.5\ncalib.delay_ps = 10\n"
                                                 "calib.energy_fj = 0.2\n"));
    CHECK(lib.cell(CellKind::fa).area == Fixed::from_int(6));
    CHECK(lib.cell(CellKind::fa).delay == fx("3.3"));
    REQUIRE(lib.calibration());
    CHECK(lib.calibration()->delay_ps_per_gate == 10.0);

    auto code_of = [](const char* text) {
        try {
            load_tech_library(kv::parse(text));
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("none");
    };
    CHECK(code_of("cell.XOR.area = 1") == "cell.XOR.area");
    CHECK(code_of("cell.FA.area = -1") == "cell.FA.area");
    CHECK(code_of("cell.DFF.delay = 1") == "cell.DFF.delay");
    CHECK(code_of("calib.area_um2 = 1") == "calib");
    CHECK(code_of("foo = 1") == "foo");
}

TEST_CASE("key-value parser") {
    const auto es = kv::parse("# c\nw_store = 8192\n[ga]\nseed = 3 # trailing\nname = \"a # b\"\nflag = true\n");
    REQUIRE(es.size() == 4);
    CHECK(es[0].key == "w_store");
    CHECK(kv::as_integer(es[0]) == 8192);
    CHECK(es[1].key == "ga.seed");
    CHECK(es[1].line == 4);
    CHECK(kv::as_string(es[2]) == "a # b");
    CHECK(kv::as_bool(es[3]));
    CHECK_THROWS_AS(kv::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(kv::parse("no equals here\n"), ConfigError);
    CHECK_THROWS_AS(kv::as_integer(kv::parse("x = \"7\"")[0]), ConfigError);
}
