// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "dcim/costmodel.hpp"
#include "dcim/dse.hpp"
#include "dcim/funcsim.hpp"
#include "dcim/pareto.hpp"
#include "dcim/rtlgen.hpp"
#include "dcim/verilog.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "sampling.hpp"

using namespace dcim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        r.pass = false;
        r.detail += " (over time budget)";
    }
    if (!r.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", id, name, r.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

dse::DcimSpec spec_for(std::int64_t w, const char* precision) {
    dse::DcimSpec s;
    s.w_store = w;
    s.precision = *find_precision(precision);
    return s;
}

// ---------------------------------------------------------------------------

Outcome table_fidelity() {
    TechLibrary lib;
    int bad = 0, checks = 0;
    struct Row {
        CellKind k;
        double a, d, e;
        bool has_delay;
    };
    const Row table[] = {{CellKind::nor2, 1, 1, 1, true},    {CellKind::or2, 1.3, 1, 2.3, true},
                         {CellKind::mux2, 2.2, 2.2, 3.0, true}, {CellKind::ha, 4.3, 2.5, 6.9, true},
                         {CellKind::fa, 5.7, 3.3, 8.4, true},   {CellKind::dff, 6.6, 0, 9.6, false},
                         {CellKind::sram, 2.2, 0, 0, true}};
    auto near = [&](double x, double y) {
        ++checks;
        if (std::abs(x - y) > 1e-9) ++bad;
    };
    for (const auto& r : table) {
        const auto& c = cell_cost(lib, r.k);
        near(c.area.to_double(), r.a);
        near(c.energy.to_double(), r.e);
        ++checks;
        if (c.delay.has_value() != r.has_delay) ++bad;
        if (r.has_delay) near(c.delay->to_double(), r.d);
    }
    for (int n = 1; n <= 64; ++n) {
        const double lg = std::ceil(std::log2(static_cast<double>(n)) - 1e-12);
        const auto add = adder_cost(lib, n), cmp = logic_module_cost(lib, LogicKind::comparator, n);
        const auto sel = mux_cost(lib, n), sh = shifter_cost(lib, n);
        const auto mul = logic_module_cost(lib, LogicKind::multiplier, n);
        near(add.area.to_double(), (n - 1) * 5.7 + 4.3);
        near(add.delay.to_double(), (n - 1) * 3.3 + 2.5);
        near(add.energy.to_double(), (n - 1) * 8.4 + 6.9);
        near(cmp.area.to_double(), add.area.to_double());
        near(cmp.delay.to_double(), add.delay.to_double());
        near(sel.area.to_double(), (n - 1) * 2.2);
        near(sel.delay.to_double(), lg * 2.2);
        near(sel.energy.to_double(), (n - 1) * 3.0);
        near(sh.area.to_double(), n * (n - 1) * 2.2);
        near(sh.delay.to_double(), lg * lg * 2.2);
        near(sh.energy.to_double(), n * (n - 1) * 3.0);
        near(mul.area.to_double(), n);
        near(mul.delay.to_double(), 1);
        near(mul.energy.to_double(), n);
    }
    return {bad == 0, std::to_string(checks) + " checks, " + std::to_string(bad) + " mismatches"};
}

Outcome int_exactness() {
    std::int64_t cases = 0, bad = 0;
    auto run = [&](const DesignPoint& dp, const sim::IntOperands& ops) {
        ++cases;
        const auto t = sim::simulate_int_dcim(dp, ops);
        if (t.outputs != oracle::int_mvm(ops.weights, ops.inputs, ops.outputs, ops.rows, ops.height, ops.row) ||
            t.outputs != sim::exact_int_mvm(ops) || static_cast<std::int64_t>(t.cycles.size()) != dp.cycles())
            ++bad;
    };
    // exhaustive: H=2, Bw=Bx=2, two outputs (the second holds the complemented weights)
    for (std::int64_t l : {1, 2})
        for (std::int64_t k : {1, 2}) {
            const DesignPoint dp{Arch::int_multiply, 4, 2, l, k, 2, 2, 0, 0};
            const int wbits = static_cast<int>(2 * 2 * l);
            for (std::uint32_t wv = 0; wv < (1u << wbits); ++wv)
                for (std::uint32_t xv = 0; xv < 16; ++xv)
                    for (std::int64_t row = 0; row < l; ++row) {
                        sim::IntOperands ops(2, l, 2);
                        for (int j = 0; j < 2 * l; ++j) {
                            const std::uint64_t w = (wv >> (2 * j)) & 3u;
                            ops.weights[static_cast<std::size_t>(j)] = w;
                            ops.weights[static_cast<std::size_t>(2 * l + j)] = 3u - w;
                        }
                        ops.inputs = {xv & 3u, xv >> 2};
                        ops.row = row;
                        run(dp, ops);
                    }
        }
    const std::int64_t exhaustive = cases;
    std::mt19937_64 g(2024);
    for (int t = 0; t < 100000; ++t) {
        const int bw = 1 + static_cast<int>(g() % 8), bx = 1 + static_cast<int>(g() % 8);
        std::vector<std::int64_t> ks;
        for (int k = 1; k <= bx; ++k)
            if (bx % k == 0) ks.push_back(k);
        const DesignPoint dp{Arch::int_multiply, bw * (1 + static_cast<std::int64_t>(g() % 2)),
                             std::int64_t{1} << (g() % 7), std::int64_t{1} << (g() % 3), ks[g() % ks.size()], bw, bx,
                             0, 0};
        sim::IntOperands ops(dp.outputs(), dp.l, dp.h);
        for (auto& w : ops.weights) w = g() & ((1u << bw) - 1);
        for (auto& x : ops.inputs) x = g() & ((1u << bx) - 1);
        ops.row = static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(dp.l));
        run(dp, ops);
    }
    return {bad == 0, std::to_string(exhaustive) + " exhaustive + " + std::to_string(cases - exhaustive) +
                          " random cases, " + std::to_string(bad) + " mismatches"};
}

Outcome fp_step_oracle() {
    std::mt19937_64 g(77);
    std::int64_t cases = 0, outputs = 0, real_checks = 0, bad = 0;
    for (const char* name : {"BF16", "FP16"}) {
        const auto p = *find_precision(name);
        const sim::FpFormat f{p.be, p.bm};
        std::vector<std::int64_t> ks;
        for (int k = 1; k <= p.bx; ++k)
            if (p.bx % k == 0) ks.push_back(k);
        for (int t = 0; t < 5000; ++t) {
            ++cases;
            const auto h = std::int64_t{1} << (g() % 6);  // up to 32
            const auto dp = make_design(p, p.bw * (1 + static_cast<std::int64_t>(g() % 2)), h,
                                        std::int64_t{1} << (g() % 2), ks[g() % ks.size()]);
            // odd cases share one exponent per group so truncation-free sums occur
            const bool narrow = t % 2 == 1;
            sim::FpWeights w(dp.outputs(), dp.l, dp.h);
            for (std::int64_t o = 0; o < dp.outputs(); ++o) {
                const std::int64_t we = narrow ? f.bias() - static_cast<std::int64_t>(g() % 4) : 0;
                for (std::int64_t r = 0; r < dp.l; ++r)
                    for (std::int64_t i = 0; i < dp.h; ++i) w.at(o, r, i) = oracle::random_fp(g, f, we);
            }
            const std::int64_t xe = narrow ? f.bias() + static_cast<std::int64_t>(g() % 4) : 0;
            std::vector<sim::FpValue> xs;
            for (std::int64_t i = 0; i < dp.h; ++i) xs.push_back(oracle::random_fp(g, f, xe));
            const std::int64_t row = static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(dp.l));
            const auto res = sim::simulate_fp_dcim(dp, w, xs, row);
            if (static_cast<std::int64_t>(res.trace.cycles.size()) != dp.cycles()) ++bad;
            for (std::int64_t o = 0; o < dp.outputs(); ++o) {
                ++outputs;
                const auto uo = static_cast<std::size_t>(o);
                std::vector<sim::FpValue> group;
                for (std::int64_t i = 0; i < dp.h; ++i) group.push_back(w.at(o, row, i));
                const auto ref = oracle::fp_dot_step(group, xs, f);
                const auto& got = res.outputs[uo];
                const bool same = ref.exponent == got.exponent && ref.mantissa == got.mantissa &&
                                  (ref.exponent == 0 || ref.sign == got.sign) &&
                                  ref.truncated == res.flags[uo].truncated && ref.overflow == res.flags[uo].overflow &&
                                  ref.underflow == res.flags[uo].underflow;
                if (!same) {
                    ++bad;
                    continue;
                }
                if (!res.inputs_truncated && !res.weights_truncated[uo] && !res.flags[uo].any()) {
                    ++real_checks;
                    if (oracle::exact_dot_scaled(group, xs) != oracle::value_scaled(got, f)) ++bad;
                }
            }
        }
    }
    const bool enough = real_checks >= 1000;
    return {bad == 0 && enough, std::to_string(cases) + " cases, " + std::to_string(outputs) + " outputs, " +
                                    std::to_string(real_checks) + " exact real-valued checks, " + std::to_string(bad) +
                                    " mismatches"};
}

Outcome reconciliation() {
    TechLibrary lib;
    std::mt19937_64 g(404);
    std::vector<DesignPoint> designs;
    for (int t = 0; t < 44; ++t) designs.push_back(sampling::random_design(g, t % 2 == 1));
    // full-width presets
    designs.push_back(make_design(*find_precision("INT8"), 64, 16, 8, 2));
    designs.push_back(make_design(*find_precision("INT4"), 64, 32, 4, 4));
    designs.push_back(make_design(*find_precision("BF16"), 64, 16, 4, 1));
    designs.push_back(make_design(*find_precision("FP16"), 66, 8, 2, 11));
    int bad = 0, n_int = 0, n_fp = 0;
    std::string first_bad;
    for (const auto& dp : designs) {
        (dp.arch == Arch::int_multiply ? n_int : n_fp)++;
        const auto nl = rtl::generate_structural_netlist(dp);
        rtl::validate_netlist(nl);
        const auto c = rtl::netlist_costs(nl, lib);
        const auto m = macro_breakdown(lib, dp);
        if (!(c.area == m.area && c.energy == m.energy && c.stages == m.stages)) {
            ++bad;
            if (first_bad.empty()) first_bad = " first: " + design_tag(dp);
        }
    }
    return {bad == 0, std::to_string(n_int) + " INT + " + std::to_string(n_fp) + " FP designs, " +
                          std::to_string(bad) + " mismatches" + first_bad};
}

Outcome frontier_quality() {
    auto s = spec_for(4096, "INT8");
    s.bounds.h_max = 512;
    s.bounds.l_max = 64;
    const auto ex = dse::enumerate_bruteforce(s);
    const auto ga = dse::nsga2_evolve(s, dse::GaParams{100, 100, 0.9, 0.2, 1});
    int dominated = 0;
    for (const auto& e : ga.entries)
        for (const auto& x : ex.entries)
            if (dse::dominates(x.cost, e.cost)) {
                ++dominated;
                break;
            }
    auto all = ex.costs();
    const auto gc = ga.costs();
    all.insert(all.end(), gc.begin(), gc.end());
    const auto ref = dse::reference_point(std::span<const CostVector>(all));
    const auto ec = ex.costs();
    const double hv_ex = dse::hypervolume(std::span<const CostVector>(ec), ref);
    const double hv_ga = dse::hypervolume(std::span<const CostVector>(gc), ref);
    const double ratio = hv_ga / hv_ex;
    return {dominated == 0 && ratio >= 0.95,
            std::to_string(ga.entries.size()) + " GA entries vs " + std::to_string(ex.entries.size()) +
                " exhaustive, " + std::to_string(dominated) + " dominated, HV ratio " + fmt("%.4f", ratio)};
}

Outcome nsga_internals() {
    std::mt19937_64 g(6);
    std::uniform_int_distribution<int> d(0, 6);
    auto point = [&] { return CostVector{double(d(g)), double(d(g)), double(d(g)), double(d(g))}; };
    std::vector<CostVector> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(point());
    const auto fast = dse::fast_nondominated_sort(std::span<const CostVector>(pts));
    // naive: peel off the non-dominated remainder
    std::vector<std::vector<std::size_t>> naive;
    std::vector<std::size_t> rest(pts.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = i;
    while (!rest.empty()) {
        std::vector<std::size_t> front, next;
        for (auto p : rest) {
            bool dom = false;
            for (auto q : rest) dom = dom || dse::dominates(pts[q], pts[p]);
            (dom ? next : front).push_back(p);
        }
        naive.push_back(front);
        rest = next;
    }
    const bool sort_ok = fast == naive;
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto a = point(), b = point(), c = point();
        if (dse::dominates(a, a)) ++violations;
        if (dse::dominates(a, b) && dse::dominates(b, a)) ++violations;
        if (dse::dominates(a, b) && dse::dominates(b, c) && !dse::dominates(a, c)) ++violations;
    }
    return {sort_ok && violations == 0, std::to_string(naive.size()) + " fronts " +
                                            (sort_ok ? "match" : "differ") + ", " + std::to_string(violations) +
                                            " property violations in 10000 trials"};
}

// INT8 frontier's minimum area*delay design; BF16 at the same (N, H, L, k)
DesignPoint matched_design(std::int64_t w, const std::function<double(const CostVector&)>& score) {
    const auto ga = dse::nsga2_evolve(spec_for(w, "INT8"), dse::GaParams{});
    const auto* best = &ga.entries.front();
    for (const auto& e : ga.entries)
        if (score(e.cost) < score(best->cost)) best = &e;
    return best->design;
}

Outcome ratio_checks() {
    TechLibrary lib;
    const auto i8 = *find_precision("INT8"), bf = *find_precision("BF16");
    const auto a = matched_design(8192, [](const CostVector& c) { return c.area * c.delay; });
    const auto mi = macro_breakdown(lib, make_design(i8, a.n, a.h, a.l, a.k));
    const auto mb = macro_breakdown(lib, make_design(bf, a.n, a.h, a.l, a.k));
    const double area_ratio = mb.area.to_double() / mi.area.to_double();
    const double share = mb.component(ComponentKind::prealign)->area.to_double() / mb.area.to_double();

    const auto e = matched_design(65536, [](const CostVector& c) { return -ops_per_energy(c); });
    const auto ci = macro_cost(lib, make_design(i8, e.n, e.h, e.l, e.k));
    const auto cb = macro_cost(lib, make_design(bf, e.n, e.h, e.l, e.k));
    const double eff_ratio = ops_per_energy(cb) / ops_per_energy(ci);

    const bool ok = area_ratio >= 1.0 && area_ratio <= 1.25 && share <= 0.15 && eff_ratio >= 0.75 && eff_ratio <= 1.05;
    return {ok, "W=8192 at N" + std::to_string(a.n) + "/H" + std::to_string(a.h) + "/L" + std::to_string(a.l) + "/k" +
                    std::to_string(a.k) + ": area ratio " + fmt("%.3f", area_ratio) + ", prealign share " +
                    fmt("%.4f", share) + "; W=65536 at N" + std::to_string(e.n) + "/H" + std::to_string(e.h) + "/L" +
                    std::to_string(e.l) + "/k" + std::to_string(e.k) + ": efficiency ratio " + fmt("%.3f", eff_ratio)};
}

Outcome precision_trend() {
    const char* order[] = {"INT2", "INT4", "INT8", "BF16", "FP16", "FP32"};
    std::string detail;
    double prev_area = 0, prev_energy = 0;
    bool ok = true;
    for (const char* p : order) {
        const auto a = dse::nsga2_evolve(spec_for(65536, p), dse::GaParams{});
        double area = 0, energy = 0;
        for (const auto& e : a.entries) {
            area += e.cost.area;
            energy += e.cost.energy;
        }
        area /= static_cast<double>(a.entries.size());
        energy /= static_cast<double>(a.entries.size());
        ok = ok && area >= prev_area && energy >= prev_energy;
        prev_area = area;
        prev_energy = energy;
        detail += std::string(detail.empty() ? "" : ", ") + p + " " + fmt("%.3g", area) + "/" + fmt("%.3g", energy);
    }
    return {ok, "avg area/energy " + detail};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// every regular file under dir, keyed by relative path
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return files;
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "dcim_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto cfg = root / "spec.cfg";
    std::ofstream(cfg) << "w_store = 8192\nprecision = \"BF16\"\n[ga]\npopulation = 60\ngenerations = 40\n";
    std::vector<std::map<std::string, std::string>> runs;
    const int jobs[] = {1, 2, 4};
    for (int j : jobs) {
        const auto out = root / ("jobs" + std::to_string(j));
        const std::string base = std::string(DCIMC_PATH) + " %s " + cfg.string() + " --seed 11 --jobs " +
                                 std::to_string(j) + " --out " + out.string() + " > /dev/null 2>&1";
        char cmd[1024];
        std::snprintf(cmd, sizeof cmd, base.c_str(), "explore --emit-plot-data");
        if (std::system(cmd) != 0) return {false, "explore failed"};
        // netlists for the two smallest-area frontier entries
        std::vector<double> areas;
        const auto frontier = nlohmann::json::parse(slurp(out / "frontier.json"));
        for (const auto& e : frontier.at("entries"))
            areas.push_back(e.at("cost").at("area").get<double>());
        std::sort(areas.begin(), areas.end());
        if (areas.empty()) return {false, "empty frontier"};
        const std::string filter = "generate --filter \"area<=" + fmt("%.17g", areas[std::min<std::size_t>(1, areas.size() - 1)]) + "\"";
        std::snprintf(cmd, sizeof cmd, base.c_str(), filter.c_str());
        if (std::system(cmd) != 0) return {false, "generate failed"};
        runs.push_back(snapshot(out));
    }
    std::size_t verilog = 0;
    for (const auto& [name, _] : runs[0])
        if (name.size() > 2 && name.substr(name.size() - 2) == ".v") ++verilog;
    bool same = runs[1] == runs[0] && runs[2] == runs[0];
    return {same && verilog > 0 && runs[0].count("frontier.csv") && runs[0].count("frontier.json"),
            std::to_string(runs.size()) + " runs (jobs 1/2/4), " + std::to_string(runs[0].size()) + " files incl. " +
                std::to_string(verilog) + " Verilog, " + (same ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
    criterion(1, "table fidelity", 1.0, table_fidelity);
    criterion(2, "INT simulator exactness", 60.0, int_exactness);
    criterion(3, "FP step-oracle equivalence", 60.0, fp_step_oracle);
    criterion(4, "cost/netlist reconciliation", 60.0, reconciliation);
    criterion(5, "frontier quality", 60.0, frontier_quality);
    criterion(6, "NSGA-II internals", 0, nsga_internals);
    criterion(7, "BF16/INT8 ratio checks", 0, ratio_checks);
    criterion(8, "precision trend", 0, precision_trend);
    criterion(9, "determinism", 0, determinism);
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
