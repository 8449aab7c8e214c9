#pragma once

// Command dispatch for the dcimc tool: estimate, explore, enumerate, compare,
// simulate, generate. Artifacts are written under the configured output
// directory; a JSON summary goes to the given stream.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dcim/config.hpp"
#include "dcim/costmodel.hpp"
#include "dcim/dse.hpp"
#include "dcim/funcsim.hpp"
#include "dcim/pareto.hpp"
#include "dcim/rtlgen.hpp"
#include "dcim/verilog.hpp"
#include "json.hpp"

namespace dcim::cli {

using json = nlohmann::json;

enum class Command { estimate, explore, enumerate, compare, simulate, generate };

inline constexpr std::array<std::string_view, 6> command_names = {"estimate", "explore",  "enumerate",
                                                                  "compare",  "simulate", "generate"};

inline std::optional<Command> command_from_name(std::string_view s) {
    for (std::size_t i = 0; i < command_names.size(); ++i)
        if (command_names[i] == s) return static_cast<Command>(i);
    return std::nullopt;
}

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_infeasible = 3;
inline constexpr int exit_internal = 4;

inline int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::infeasible_point:
        case ErrorCode::no_feasible_design: return exit_infeasible;
        case ErrorCode::structural: return exit_internal;
        default: return exit_validation;
    }
}

inline json error_json(const std::exception& ex) {
    json e;
    if (const auto* err = dynamic_cast<const Error*>(&ex)) {
        e["code"] = to_string(err->code());
        if (const auto* ce = dynamic_cast<const ConfigError*>(&ex)) {
            if (!ce->key().empty()) e["key"] = ce->key();
            if (ce->line() > 0) e["line"] = ce->line();
        }
    } else {
        e["code"] = "internal";
    }
    e["message"] = ex.what();
    return json{{"error", e}};
}

// Extra inputs that are not part of the run configuration.
struct Options {
    std::string trace_path;     // simulate: dump the first trial's trace
    std::string frontier_path;  // generate: frontier JSON (default <out>/frontier.json)
};

// ---------------------------------------------------------------------------
// formatting

// shortest round-trip representation
inline std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline const char* csv_header() {
    return "arch,precision,N,H,L,k,Bw,Bx,BE,BM,area_gates,delay_gates,energy_gates,throughput_ops_per_gd,"
           "area_um2,delay_ps,energy_fj,tops_per_w,tops_per_mm2";
}

inline std::string csv_row(const dse::ArchiveEntry& e, const Precision& p, const TechLibrary& lib) {
    const auto& d = e.design;
    std::ostringstream os;
    os << arch_name(d.arch) << ',' << p.name << ',' << d.n << ',' << d.h << ',' << d.l << ',' << d.k << ',' << d.bw
       << ',' << d.bx << ',' << d.be << ',' << d.bm << ',' << fmt(e.cost.area) << ',' << fmt(e.cost.delay) << ','
       << fmt(e.cost.energy) << ',' << fmt(e.cost.throughput);
    if (lib.calibration()) {
        const auto a = to_absolute(e.cost, *lib.calibration());
        os << ',' << fmt(a.area_um2) << ',' << fmt(a.delay_ps) << ',' << fmt(a.energy_fj) << ',' << fmt(a.tops_per_w)
           << ',' << fmt(a.tops_per_mm2);
    } else {
        os << ",,,,,";
    }
    return os.str();
}

inline std::string frontier_csv(const dse::ParetoArchive& a, const Precision& p, const TechLibrary& lib) {
    std::string out = std::string(csv_header()) + "\n";
    for (const auto& e : a.entries) out += csv_row(e, p, lib) + "\n";
    return out;
}

// Rows of a CSV written by frontier_csv, keyed by header name.
inline std::vector<std::map<std::string, std::string>> read_csv(const std::string& text) {
    std::vector<std::map<std::string, std::string>> rows;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        for (;;) {
            const auto c = line.find(',', pos);
            cells.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        if (header.empty()) {
            header = cells;
            continue;
        }
        if (cells.size() != header.size()) throw Error(ErrorCode::parse, "csv row width differs from header");
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json design_json(const DesignPoint& d) {
    return json{{"arch", arch_name(d.arch)}, {"N", d.n}, {"H", d.h}, {"L", d.l}, {"k", d.k},
                {"Bw", d.bw}, {"Bx", d.bx}, {"BE", d.be}, {"BM", d.bm}, {"tag", design_tag(d)}};
}

inline DesignPoint design_from_json(const json& j) {
    const auto arch = arch_from_name(j.at("arch").get<std::string>());
    if (!arch) throw Error(ErrorCode::parse, "unknown arch in frontier file");
    DesignPoint d{*arch,
                  j.at("N").get<std::int64_t>(),
                  j.at("H").get<std::int64_t>(),
                  j.at("L").get<std::int64_t>(),
                  j.at("k").get<std::int64_t>(),
                  j.at("Bw").get<int>(),
                  j.at("Bx").get<int>(),
                  j.at("BE").get<int>(),
                  j.at("BM").get<int>()};
    return d;
}

inline json cost_json(const CostVector& c) {
    return json{{"area", c.area}, {"delay", c.delay}, {"energy", c.energy}, {"throughput", c.throughput}};
}

inline json absolute_json(const CostVector& c, const TechLibrary& lib) {
    if (!lib.calibration()) return nullptr;
    const auto a = to_absolute(c, *lib.calibration());
    return json{{"area_um2", a.area_um2},     {"delay_ps", a.delay_ps},         {"energy_fj", a.energy_fj},
                {"tops_per_w", a.tops_per_w}, {"tops_per_mm2", a.tops_per_mm2}};
}

inline json archive_json(const dse::ParetoArchive& a, const dse::DcimSpec& spec, const TechLibrary& lib) {
    json entries = json::array();
    for (const auto& e : a.entries)
        entries.push_back({{"design", design_json(e.design)},
                           {"cost", cost_json(e.cost)},
                           {"absolute", absolute_json(e.cost, lib)}});
    return json{{"meta",
                 {{"spec_hash", a.meta.spec_hash},
                  {"spec", dse::canonical_text(spec)},
                  {"seed", a.meta.seed},
                  {"generations", a.meta.generations},
                  {"method", a.meta.method}}},
                {"entries", entries}};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// distillation

inline double metric_value(const dse::ArchiveEntry& e, const std::string& metric, const TechLibrary& lib) {
    const auto& c = e.cost;
    if (metric == "area") return c.area;
    if (metric == "delay") return c.delay;
    if (metric == "energy") return c.energy;
    if (metric == "throughput") return c.throughput;
    if (metric == "N") return static_cast<double>(e.design.n);
    if (metric == "H") return static_cast<double>(e.design.h);
    if (metric == "L") return static_cast<double>(e.design.l);
    if (metric == "k") return static_cast<double>(e.design.k);
    if (!lib.calibration())
        throw ConfigError(ErrorCode::validation, "filter", 0,
                          "metric '" + metric + "' needs calib.* values in the tech library");
    const auto a = to_absolute(c, *lib.calibration());
    if (metric == "area_um2") return a.area_um2;
    if (metric == "delay_ps") return a.delay_ps;
    if (metric == "energy_fj") return a.energy_fj;
    if (metric == "tops_per_w") return a.tops_per_w;
    if (metric == "tops_per_mm2") return a.tops_per_mm2;
    throw ConfigError(ErrorCode::validation, "filter", 0, "unknown metric '" + metric + "'");
}

inline bool passes(const dse::ArchiveEntry& e, const std::vector<cfg::Filter>& filters, const TechLibrary& lib) {
    for (const auto& f : filters) {
        const double v = metric_value(e, f.metric, lib);
        bool ok = false;
        if (f.op == "<=") ok = v <= f.value;
        else if (f.op == ">=") ok = v >= f.value;
        else if (f.op == "<") ok = v < f.value;
        else if (f.op == ">") ok = v > f.value;
        else if (f.op == "==") ok = v == f.value;
        if (!ok) return false;
    }
    return true;
}

inline std::vector<dse::ArchiveEntry> distill(const std::vector<dse::ArchiveEntry>& entries,
                                              const cfg::RunConfig& cfg) {
    std::vector<dse::ArchiveEntry> out;
    for (const auto& e : entries) {
        if (!passes(e, cfg.filters, cfg.tech)) continue;
        if (!cfg.select.empty() &&
            std::find(cfg.select.begin(), cfg.select.end(), design_tag(e.design)) == cfg.select.end())
            continue;
        out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// commands

namespace detail {

inline std::filesystem::path out_dir(const cfg::RunConfig& cfg) { return cfg.out_dir; }

inline json estimate(const cfg::RunConfig& cfg) {
    const auto dp = cfg::explicit_design(cfg);
    const auto m = macro_breakdown(cfg.tech, dp);
    const auto v = to_cost_vector(m, cfg.spec.activity);
    json comps = json::array();
    for (const auto& c : m.components)
        comps.push_back({{"component", component_name(c.kind)},
                         {"area", c.cost.area.to_double()},
                         {"delay", c.cost.delay.to_double()},
                         {"energy", c.cost.energy.to_double()}});
    return json{{"command", "estimate"},
                {"design", design_json(dp)},
                {"cost", cost_json(v)},
                {"absolute", absolute_json(v, cfg.tech)},
                {"stages",
                 {{"PreArray", m.stages.pre_array.to_double()},
                  {"ArrayToAccu", m.stages.array_to_accu.to_double()},
                  {"FusionOut", m.stages.fusion_out.to_double()}}},
                {"components", comps},
                {"weights_stored", dp.weights_stored()},
                {"meets_w_store", dp.weights_stored() == cfg.spec.w_store}};
}

inline std::string plot_data(const std::vector<std::vector<CostVector>>& snapshots) {
    std::vector<CostVector> all;
    for (const auto& s : snapshots) all.insert(all.end(), s.begin(), s.end());
    std::string out = "generation,archive_size,hypervolume\n";
    if (all.empty()) return out;
    const auto ref = dse::reference_point(all);
    for (std::size_t g = 0; g < snapshots.size(); ++g)
        out += std::to_string(g) + "," + std::to_string(snapshots[g].size()) + "," +
               fmt(dse::hypervolume(std::span<const CostVector>(snapshots[g]), ref)) + "\n";
    return out;
}

inline json write_archive(const cfg::RunConfig& cfg, const dse::ParetoArchive& a, const std::string& stem) {
    const auto dir = out_dir(cfg);
    write_file(dir / (stem + ".csv"), frontier_csv(a, cfg.spec.precision, cfg.tech));
    write_file(dir / (stem + ".json"), archive_json(a, cfg.spec, cfg.tech).dump(2) + "\n");
    return json{{"entries", a.entries.size()},
                {"csv", (dir / (stem + ".csv")).string()},
                {"json", (dir / (stem + ".json")).string()}};
}

inline dse::ParetoArchive run_explore(const cfg::RunConfig& cfg, json& summary) {
    std::vector<std::vector<CostVector>> snapshots;
    dse::GenerationObserver observer;
    if (cfg.emit_plot_data)
        observer = [&](int, const std::vector<dse::ArchiveEntry>& archive) {
            std::vector<CostVector> c;
            for (const auto& e : archive) c.push_back(e.cost);
            snapshots.push_back(std::move(c));
        };
    auto archive = dse::nsga2_evolve(cfg.spec, cfg.ga, cfg.tech, cfg.jobs, observer);
    summary = write_archive(cfg, archive, "frontier");
    if (cfg.emit_plot_data) {
        const auto path = out_dir(cfg) / "plot_data.csv";
        write_file(path, plot_data(snapshots));
        summary["plot_data"] = path.string();
    }
    return archive;
}

inline json explore(const cfg::RunConfig& cfg) {
    json summary;
    run_explore(cfg, summary);
    summary["command"] = "explore";
    return summary;
}

inline json enumerate(const cfg::RunConfig& cfg) {
    const auto archive = dse::enumerate_bruteforce(cfg.spec, cfg.tech, cfg.enumerate_cap, cfg.jobs);
    auto summary = write_archive(cfg, archive, "exhaustive");
    summary["command"] = "enumerate";
    return summary;
}

inline json compare(const cfg::RunConfig& cfg) {
    const auto exhaustive = dse::enumerate_bruteforce(cfg.spec, cfg.tech, cfg.enumerate_cap, cfg.jobs);
    const auto ga = dse::nsga2_evolve(cfg.spec, cfg.ga, cfg.tech, cfg.jobs);
    auto all = exhaustive.costs();
    const auto gc = ga.costs();
    all.insert(all.end(), gc.begin(), gc.end());
    const auto ref = dse::reference_point(all);
    const auto ec = exhaustive.costs();
    const double hv_ex = dse::hypervolume(std::span<const CostVector>(ec), ref);
    const double hv_ga = dse::hypervolume(std::span<const CostVector>(gc), ref);
    std::size_t dominated = 0;
    for (const auto& g : ga.entries)
        for (const auto& e : exhaustive.entries)
            if (dse::dominates(e.cost, g.cost)) {
                ++dominated;
                break;
            }
    json report{{"command", "compare"},
                {"ga_entries", ga.entries.size()},
                {"exhaustive_entries", exhaustive.entries.size()},
                {"ga_entries_dominated", dominated},
                {"hypervolume_ga", hv_ga},
                {"hypervolume_exhaustive", hv_ex},
                {"hypervolume_ratio", hv_ex > 0 ? hv_ga / hv_ex : 1.0},
                {"reference", cost_json(ref)}};
    write_file(out_dir(cfg) / "compare.json", report.dump(2) + "\n");
    return report;
}

using boost::multiprecision::cpp_int;

// sum of w*x in units of 2^-(2*(bias + BM - 1)); exact
inline cpp_int exact_fp_dot(const std::vector<sim::FpValue>& w, const std::vector<sim::FpValue>& x) {
    cpp_int sum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].is_zero() || x[i].is_zero()) continue;
        cpp_int term = cpp_int(w[i].mantissa) * cpp_int(x[i].mantissa);
        term <<= static_cast<unsigned>(w[i].exponent + x[i].exponent);
        sum += w[i].sign * x[i].sign < 0 ? cpp_int(-term) : term;
    }
    return sum;
}

inline cpp_int fp_in_product_units(const sim::FpValue& v, const sim::FpFormat& f) {
    if (v.is_zero()) return 0;
    // value = m * 2^(e - bias - (BM-1)); product units carry 2^(2*(bias+BM-1))
    cpp_int t = cpp_int(v.mantissa);
    const long shift = static_cast<long>(v.exponent) + f.bias() + (f.bm - 1);
    t <<= static_cast<unsigned>(shift);
    return v.sign < 0 ? cpp_int(-t) : t;
}

// floor-aligned signed mantissas, recomputed with exact integers
inline std::vector<cpp_int> aligned_mantissas(const std::vector<sim::FpValue>& vs) {
    std::uint32_t emax = 0;
    for (const auto& v : vs) emax = std::max(emax, v.exponent);
    std::vector<cpp_int> out;
    for (const auto& v : vs) {
        const cpp_int m = v.is_zero() ? cpp_int(0) : cpp_int(v.signed_mantissa());
        const cpp_int d = cpp_int(1) << (emax - v.exponent);
        // floor division
        cpp_int q = m / d;
        if (q * d != m && m < 0) q -= 1;
        out.push_back(q);
    }
    return out;
}

inline json simulate(const cfg::RunConfig& cfg, const Options& opt) {
    const auto dp = cfg::explicit_design(cfg);
    dse::Rng rng(cfg.simulate_seed);
    std::int64_t mismatches = 0, flagged = 0, exact_checked = 0, real_checked = 0, trace_cycles_bad = 0;
    std::optional<sim::SimTrace> first_trace;
    for (std::int64_t t = 0; t < cfg.simulate_trials; ++t) {
        if (dp.arch == Arch::int_multiply) {
            sim::IntOperands ops(dp.outputs(), dp.l, dp.h);
            for (auto& w : ops.weights) w = rng.below(std::uint64_t{1} << dp.bw);
            for (auto& x : ops.inputs) x = rng.below(std::uint64_t{1} << dp.bx);
            ops.row = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(dp.l)));
            const auto trace = sim::simulate_int_dcim(dp, ops);
            if (trace.outputs != sim::exact_int_mvm(ops)) ++mismatches;
            if (static_cast<std::int64_t>(trace.cycles.size()) != dp.cycles()) ++trace_cycles_bad;
            ++exact_checked;
            if (!first_trace) first_trace = trace;
        } else {
            const sim::FpFormat f = sim::format_of(dp);
            // odd trials share one exponent per group and use short mantissas
            // so the result is usually representable and the real-valued
            // check applies; even trials draw exponents around the bias
            const bool narrow = t % 2 == 1;
            auto random_fp = [&](std::int64_t shared_e) {
                if (rng.below(16) == 0) return sim::fp_zero();
                const std::int64_t lo = std::max<std::int64_t>(1, f.bias() - 4);
                const std::int64_t hi = std::min<std::int64_t>(f.max_exponent(), f.bias() + 4);
                sim::FpValue v;
                v.sign = rng.chance(0.5) ? -1 : 1;
                v.exponent = static_cast<std::uint32_t>(
                    shared_e > 0 ? shared_e : lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))));
                v.mantissa = std::uint64_t{1} << (f.bm - 1);
                if (narrow && f.bm >= 2) v.mantissa |= rng.below(2) << (f.bm - 2);
                if (!narrow) v.mantissa |= rng.below(std::uint64_t{1} << (f.bm - 1));
                return v;
            };
            auto group_exponent = [&]() -> std::int64_t {
                if (!narrow) return 0;
                return std::max<std::int64_t>(1, f.bias() - 2) + static_cast<std::int64_t>(rng.below(5));
            };
            const auto row = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(dp.l)));
            sim::FpWeights w(dp.outputs(), dp.l, dp.h);
            for (std::int64_t o = 0; o < dp.outputs(); ++o) {
                const auto e = group_exponent();
                for (std::int64_t r = 0; r < dp.l; ++r)
                    for (std::int64_t i = 0; i < dp.h; ++i) w.at(o, r, i) = random_fp(e);
            }
            std::vector<sim::FpValue> xs(static_cast<std::size_t>(dp.h));
            const auto xe = group_exponent();
            for (auto& v : xs) v = random_fp(xe);
            const auto res = sim::simulate_fp_dcim(dp, w, xs, row);
            if (static_cast<std::int64_t>(res.trace.cycles.size()) != dp.cycles()) ++trace_cycles_bad;
            if (!first_trace) first_trace = res.trace;
            const auto xa = aligned_mantissas(xs);
            for (std::int64_t o = 0; o < dp.outputs(); ++o) {
                const auto uo = static_cast<std::size_t>(o);
                std::vector<sim::FpValue> group;
                for (std::int64_t i = 0; i < dp.h; ++i) group.push_back(w.at(o, row, i));
                const auto wa = aligned_mantissas(group);
                // integer datapath against an independent aligned dot product
                cpp_int dot = 0;
                for (std::size_t i = 0; i < wa.size(); ++i) dot += wa[i] * xa[i];
                ++exact_checked;
                const bool raw_ok = dot == cpp_int(res.raw[uo]);
                // converter: truncation toward zero to BM bits
                const unsigned s = static_cast<unsigned>(res.x_emax + res.w_emax[uo]);
                const cpp_int scaled = cpp_int(dot) << s;
                bool conv_ok = true;
                const auto& fl = res.flags[uo];
                if (!fl.overflow && !fl.underflow) {
                    const cpp_int got = fp_in_product_units(res.outputs[uo], f);
                    const cpp_int mag = abs(scaled);
                    const cpp_int err = abs(scaled - got);
                    conv_ok = abs(got) <= mag && (got == 0) == (mag == 0) && (got >= 0) == (scaled >= 0);
                    if (mag != 0) {
                        const unsigned p = static_cast<unsigned>(msb(mag));
                        const cpp_int ulp = p + 1 >= static_cast<unsigned>(f.bm) ? cpp_int(1) << (p + 1 - f.bm) : cpp_int(1);
                        conv_ok = conv_ok && err < ulp && (fl.truncated == (err != 0));
                    }
                }
                if (!raw_ok || !conv_ok) {
                    ++mismatches;
                    continue;
                }
                const bool lossy = res.inputs_truncated || res.weights_truncated[uo] || fl.any();
                if (lossy) {
                    ++flagged;
                    continue;
                }
                ++real_checked;
                if (exact_fp_dot(group, xs) != fp_in_product_units(res.outputs[uo], f)) ++mismatches;
            }
        }
    }
    json report{{"command", "simulate"},
                {"design", design_json(dp)},
                {"trials", cfg.simulate_trials},
                {"seed", cfg.simulate_seed},
                {"exact_checks", exact_checked},
                {"real_valued_checks", real_checked},
                {"lossy_outputs", flagged},
                {"mismatches", mismatches},
                {"bad_cycle_counts", trace_cycles_bad},
                {"ok", mismatches == 0 && trace_cycles_bad == 0}};
    if (!opt.trace_path.empty() && first_trace) {
        std::ostringstream os;
        sim::dump_trace(os, *first_trace);
        write_file(opt.trace_path, os.str());
        report["trace"] = opt.trace_path;
    }
    return report;
}

inline json manifest_json(const DesignPoint& dp, const rtl::NetlistCosts& nc, const MacroBreakdown& m, bool ok) {
    json tally;
    for (auto k : all_cell_kinds) tally[std::string(rtl::primitive_name(k))] = nc.tally.count(k);
    auto stages = [](const StageDelays& s) {
        return json{{"PreArray", s.pre_array.str()}, {"ArrayToAccu", s.array_to_accu.str()}, {"FusionOut", s.fusion_out.str()}};
    };
    return json{{"design", design_json(dp)},
                {"tally", tally},
                {"netlist", {{"area", nc.area.str()}, {"energy", nc.energy.str()}, {"stages", stages(nc.stages)}}},
                {"model", {{"area", m.area.str()}, {"energy", m.energy.str()}, {"stages", stages(m.stages)}}},
                {"reconciled", ok}};
}

inline json generate(const cfg::RunConfig& cfg, const Options& opt) {
    std::vector<DesignPoint> designs;
    json summary{{"command", "generate"}};
    if (cfg.design.any()) {
        designs.push_back(cfg::explicit_design(cfg));
    } else {
        const auto path = opt.frontier_path.empty() ? out_dir(cfg) / "frontier.json"
                                                    : std::filesystem::path(opt.frontier_path);
        std::vector<dse::ArchiveEntry> entries;
        if (std::filesystem::exists(path)) {
            const auto j = json::parse(read_file(path));
            if (j.at("meta").at("spec_hash").get<std::string>() != dse::spec_hash(cfg.spec))
                throw ConfigError(ErrorCode::validation, "frontier", 0,
                                  path.string() + " was explored for a different spec; rerun explore");
            for (const auto& e : j.at("entries")) {
                const auto dp = design_from_json(e.at("design"));
                entries.push_back({dp, macro_cost(cfg.tech, dp, cfg.spec.activity)});
            }
        } else {
            json ignored;
            entries = run_explore(cfg, ignored).entries;
        }
        const auto chosen = distill(entries, cfg);
        if (chosen.empty())
            throw ConfigError(ErrorCode::validation, "filter", 0, "no frontier entry passes the filters and selection");
        if (static_cast<std::int64_t>(chosen.size()) > cfg.generate_limit)
            throw ConfigError(ErrorCode::validation, "generate.limit", 0,
                              std::to_string(chosen.size()) + " designs selected, limit is " +
                                  std::to_string(cfg.generate_limit) +
                                  "; narrow with --filter/--select or raise generate.limit");
        for (const auto& e : chosen) designs.push_back(e.design);
    }
    json outputs = json::array();
    bool all_ok = true;
    for (const auto& dp : designs) {
        const auto nl = rtl::generate_structural_netlist(dp);
        rtl::validate_netlist(nl);
        const auto nc = rtl::netlist_costs(nl, cfg.tech);
        const auto m = macro_breakdown(cfg.tech, dp);
        const bool ok = nc.area == m.area && nc.energy == m.energy && nc.stages == m.stages;
        all_ok = all_ok && ok;
        const auto dir = out_dir(cfg) / design_tag(dp);
        write_file(dir / "top.v", rtl::serialize_verilog(nl));
        write_file(dir / "cells.v", rtl::cells_verilog());
        write_file(dir / "manifest.json", manifest_json(dp, nc, m, ok).dump(2) + "\n");
        outputs.push_back({{"tag", design_tag(dp)}, {"dir", dir.string()}, {"reconciled", ok}});
    }
    summary["designs"] = outputs;
    if (!all_ok) throw Error(ErrorCode::structural, "generated netlist does not reconcile with the cost model");
    return summary;
}

}  // namespace detail

// Runs one command; returns the process exit status. Domain errors are
// reported as JSON on `err`.
inline int run_command(const cfg::RunConfig& cfg, Command cmd, std::ostream& out, std::ostream& err,
                       const Options& opt = {}) {
    try {
        json report;
        switch (cmd) {
            case Command::estimate: report = detail::estimate(cfg); break;
            case Command::explore: report = detail::explore(cfg); break;
            case Command::enumerate: report = detail::enumerate(cfg); break;
            case Command::compare: report = detail::compare(cfg); break;
            case Command::simulate: report = detail::simulate(cfg, opt); break;
            case Command::generate: report = detail::generate(cfg, opt); break;
        }
        out << report.dump(2) << "\n";
        if (cmd == Command::simulate && !report.at("ok").get<bool>()) return exit_internal;
        return exit_ok;
    } catch (const Error& e) {
        err << error_json(e).dump() << "\n";
        return exit_code_for(e.code());
    } catch (const json::exception& e) {
        err << error_json(Error(ErrorCode::parse, e.what())).dump() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << error_json(e).dump() << "\n";
        return exit_internal;
    }
}

}  // namespace dcim::cli
