#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "dcim/funcsim.hpp"
#include "golden.hpp"
#include "oracles.hpp"

using namespace dcim;
using namespace dcim::sim;

namespace {

DesignPoint int_design(std::int64_t n, std::int64_t h, std::int64_t l, std::int64_t k, int bw, int bx) {
    return {Arch::int_multiply, n, h, l, k, bw, bx, 0, 0};
}

IntOperands random_ops(std::mt19937_64& g, const DesignPoint& dp) {
    IntOperands ops(dp.outputs(), dp.l, dp.h);
    for (auto& w : ops.weights) w = g() & ((std::uint64_t{1} << dp.bw) - 1);
    for (auto& x : ops.inputs) x = g() & ((std::uint64_t{1} << dp.bx) - 1);
    ops.row = static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(dp.l));
    return ops;
}

}  // namespace

TEST_CASE("INT simulator: hand example") {
    // two outputs of 2-bit weights, H=2, one row
    const auto dp = int_design(4, 2, 1, 1, 2, 2);
    IntOperands ops(2, 1, 2);
    ops.weight(0, 0, 0) = 3;
    ops.weight(0, 0, 1) = 1;
    ops.weight(1, 0, 0) = 2;
    ops.weight(1, 0, 1) = 2;
    ops.inputs = {2, 3};
    const auto t = simulate_int_dcim(dp, ops);
    CHECK(t.outputs == std::vector<std::int64_t>{9, 10});
    REQUIRE(t.cycles.size() == 2);
    // MSB slice first: x = {1, 1}
    CHECK(t.cycles[0].slices == std::vector<std::int64_t>{1, 1});
    CHECK(t.cycles[1].slices == std::vector<std::int64_t>{0, 1});
    // column 0 holds bit 0 of output 0's weights: {1, 1}
    CHECK(t.cycles[0].partials[0] == 2);
    CHECK(t.cycles[1].accumulators[0] == 2 * 2 + 1);
}

TEST_CASE("INT simulator matches the reference on random cases") {
    std::mt19937_64 g(19);
    for (int t = 0; t < 2000; ++t) {
        const int bw = 1 + static_cast<int>(g() % 8), bx = 1 + static_cast<int>(g() % 8);
        std::vector<std::int64_t> ks;
        for (int k = 1; k <= bx; ++k)
            if (bx % k == 0) ks.push_back(k);
        const auto dp = int_design(bw * (1 + static_cast<std::int64_t>(g() % 3)), std::int64_t{1} << (g() % 7),
                                   std::int64_t{1} << (g() % 3), ks[g() % ks.size()], bw, bx);
        const auto ops = random_ops(g, dp);
        const auto tr = simulate_int_dcim(dp, ops);
        REQUIRE(tr.outputs == exact_int_mvm(ops));
        REQUIRE(tr.outputs == oracle::int_mvm(ops.weights, ops.inputs, ops.outputs, ops.rows, ops.height, ops.row));
        REQUIRE(static_cast<std::int64_t>(tr.cycles.size()) == dp.cycles());
    }
}

TEST_CASE("INT simulator input checks") {
    const auto dp = int_design(4, 2, 2, 1, 2, 2);
    IntOperands ops(2, 2, 2);
    ops.inputs[0] = 4;
    try {
        simulate_int_dcim(dp, ops);
        FAIL("expected invalid_width");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_width);
    }
    IntOperands wrong(2, 1, 2);
    try {
        simulate_int_dcim(dp, wrong);
        FAIL("expected invalid_shape");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_shape);
    }
}

TEST_CASE("golden cycle trace") {
    const auto dp = int_design(2, 2, 2, 1, 1, 1);
    IntOperands ops(2, 2, 2);
    ops.weights = {1, 0, 1, 1, 0, 1, 1, 1};
    ops.inputs = {1, 1};
    ops.row = 1;
    std::ostringstream a;
    dump_trace(a, simulate_int_dcim(dp, ops));
    CHECK(golden::matches("trace_int_N2_H2_L2_k1_Bw1_Bx1.csv", a.str()));

    const auto dp4 = int_design(8, 4, 2, 2, 4, 4);
    IntOperands ops4(2, 2, 4);
    for (std::size_t i = 0; i < ops4.weights.size(); ++i) ops4.weights[i] = (i * 7 + 3) % 16;
    ops4.inputs = {15, 4, 9, 2};
    ops4.row = 0;
    std::ostringstream b;
    dump_trace(b, simulate_int_dcim(dp4, ops4));
    CHECK(golden::matches("trace_int_N8_H4_L2_k2_Bw4_Bx4.csv", b.str()));
}

TEST_CASE("FP helpers") {
    const FpFormat bf{8, 8};
    CHECK(bf.bias() == 127);
    CHECK(bf.max_exponent() == 254);
    CHECK(to_double({1, 127, 128}, bf) == 1.0);
    CHECK(to_double({-1, 128, 192}, bf) == -3.0);
    CHECK(floor_shift(-5, 1) == -3);
    CHECK(floor_shift(5, 70) == 0);

    const std::vector<FpValue> xs{{1, 130, 128}, {-1, 128, 160}, {1, 0, 0}};
    const auto a = prealign_inputs(xs);
    CHECK(a.emax == 130);
    CHECK(a.aligned == std::vector<std::int64_t>{128, -40, 0});
    CHECK(a.truncated == std::vector<bool>{false, false, false});

    // 1.5 * 2^(base...) style normalization
    const auto c = int_to_fp_convert(3 << 10, 0, bf);
    CHECK(c.value.mantissa == 192);
    CHECK(c.value.exponent == 11);
    CHECK_FALSE(c.flags.any());
    const auto t = int_to_fp_convert(0x1FF, 0, bf);
    CHECK(t.flags.truncated);
    CHECK(t.value.mantissa == 0xFF);
    CHECK(int_to_fp_convert(1, 300, bf).flags.overflow);
    CHECK(int_to_fp_convert(1, -5, bf).flags.underflow);
    CHECK(int_to_fp_convert(0, 0, bf).value.is_zero());
}

TEST_CASE("FP simulator against the scalar step oracle") {
    std::mt19937_64 g(23);
    for (const char* name : {"BF16", "FP16", "FP8"}) {
        const auto p = *find_precision(name);
        const FpFormat f{p.be, p.bm};
        std::int64_t real_checks = 0;
        for (int t = 0; t < 300; ++t) {
            std::vector<std::int64_t> ks;
            for (int k = 1; k <= p.bx; ++k)
                if (p.bx % k == 0) ks.push_back(k);
            const auto h = std::int64_t{1} << (g() % 6);
            const auto dp = make_design(p, p.bw * (1 + static_cast<std::int64_t>(g() % 2)), h, 2, ks[g() % ks.size()]);
            const bool narrow = t % 2;
            const std::int64_t xe = narrow ? f.bias() + static_cast<std::int64_t>(g() % 3) : 0;
            FpWeights w(dp.outputs(), dp.l, dp.h);
            for (std::int64_t o = 0; o < dp.outputs(); ++o) {
                const std::int64_t we = narrow ? f.bias() - static_cast<std::int64_t>(g() % 3) : 0;
                for (std::int64_t r = 0; r < dp.l; ++r)
                    for (std::int64_t i = 0; i < dp.h; ++i) w.at(o, r, i) = oracle::random_fp(g, f, we);
            }
            std::vector<FpValue> xs;
            for (std::int64_t i = 0; i < dp.h; ++i) xs.push_back(oracle::random_fp(g, f, xe));
            const std::int64_t row = static_cast<std::int64_t>(g() % 2);
            const auto res = simulate_fp_dcim(dp, w, xs, row);
            REQUIRE(static_cast<std::int64_t>(res.trace.cycles.size()) == dp.cycles());
            for (std::int64_t o = 0; o < dp.outputs(); ++o) {
                const auto uo = static_cast<std::size_t>(o);
                std::vector<FpValue> group;
                for (std::int64_t i = 0; i < dp.h; ++i) group.push_back(w.at(o, row, i));
                oracle::cpp_int raw;
                const auto ref = oracle::fp_dot_step(group, xs, f, &raw);
                REQUIRE(raw == oracle::cpp_int(res.raw[uo]));
                REQUIRE(ref.exponent == res.outputs[uo].exponent);
                REQUIRE(ref.mantissa == res.outputs[uo].mantissa);
                if (ref.exponent != 0) REQUIRE(ref.sign == res.outputs[uo].sign);
                REQUIRE(ref.truncated == res.flags[uo].truncated);
                REQUIRE(ref.overflow == res.flags[uo].overflow);
                REQUIRE(ref.underflow == res.flags[uo].underflow);
                const bool lossless = !res.inputs_truncated && !res.weights_truncated[uo] && !res.flags[uo].any();
                if (lossless) {
                    ++real_checks;
                    REQUIRE(oracle::exact_dot_scaled(group, xs) == oracle::value_scaled(res.outputs[uo], f));
                }
            }
        }
        INFO(name);
        CHECK(real_checks > 50);
    }
}

TEST_CASE("FP simulator rejects bad operands") {
    const auto dp = make_design(*find_precision("BF16"), 8, 2, 1, 1);
    FpWeights w(1, 1, 2);
    std::vector<FpValue> xs{{1, 127, 5}, {1, 127, 128}};  // hidden bit missing
    CHECK_THROWS_AS(simulate_fp_dcim(dp, w, xs), Error);
    CHECK_THROWS_AS(simulate_fp_dcim(make_design(*find_precision("INT8"), 8, 2, 1, 1), w, xs), Error);
}
