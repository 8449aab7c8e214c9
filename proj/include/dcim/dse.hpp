#pragma once

// Constrained design-space exploration over (H, L, k): N follows from the
// capacity equality N*H*L/Bw = W_store, so every individual is repaired onto
// the feasible set instead of being penalized.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "dcim/costmodel.hpp"
#include "dcim/error.hpp"
#include "dcim/pareto.hpp"

namespace dcim::dse {

struct Bounds {
    int n_min_factor = 4;       // N must be strictly greater than n_min_factor * Bw
    std::int64_t l_max = 64;
    std::int64_t h_max = 2048;

    bool operator==(const Bounds&) const = default;
};

struct DcimSpec {
    std::int64_t w_store = 0;
    Precision precision;
    std::vector<Arch> archs;  // empty: the precision's own architecture
    Bounds bounds;
    double activity = 1.0;

    // Architectures able to run the requested precision.
    std::vector<Arch> active_archs() const {
        std::vector<Arch> out;
        if (archs.empty()) return {precision.arch};
        for (auto a : archs)
            if (a == precision.arch && std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
        return out;
    }
};

inline void validate(const DcimSpec& spec) {
    if (spec.w_store < 1) throw Error(ErrorCode::validation, "w_store must be >= 1");
    if (spec.precision.bw < 1 || spec.precision.bx < 1)
        throw Error(ErrorCode::validation, "precision does not resolve to bit-widths");
    if (spec.bounds.n_min_factor < 0 || spec.bounds.l_max < 1 || spec.bounds.h_max < 1)
        throw Error(ErrorCode::validation, "bounds must be positive");
    if (!(spec.activity > 0 && spec.activity <= 1))
        throw Error(ErrorCode::validation, "activity factor must lie in (0, 1]");
    if (spec.active_archs().empty())
        throw Error(ErrorCode::validation,
                    "no enabled architecture supports precision " + spec.precision.name);
}

inline std::string arch_list(const std::vector<Arch>& archs) {
    std::string s;
    for (auto a : archs) s += (s.empty() ? "" : ",") + std::string(arch_name(a));
    return s;
}

inline std::string canonical_text(const DcimSpec& spec) {
    std::ostringstream os;
    os << "w_store=" << spec.w_store << ";precision=" << spec.precision.name
       << ";arch=" << arch_list(spec.active_archs()) << ";n_min_factor=" << spec.bounds.n_min_factor
       << ";l_max=" << spec.bounds.l_max << ";h_max=" << spec.bounds.h_max << ";activity=" << spec.activity;
    return os.str();
}

// FNV-1a, 64-bit
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string spec_hash(const DcimSpec& spec) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << fnv1a(canonical_text(spec));
    return os.str();
}

struct GaParams {
    int population = 100;
    int generations = 100;
    double crossover = 0.9;
    double mutation = 0.2;
    std::uint64_t seed = 1;
};

inline void validate(const GaParams& p) {
    if (p.population < 4 || p.population % 2 != 0)
        throw Error(ErrorCode::validation, "population must be even and >= 4");
    if (p.generations < 0) throw Error(ErrorCode::validation, "generations must be >= 0");
    if (!(p.crossover >= 0 && p.crossover <= 1)) throw Error(ErrorCode::validation, "crossover probability must lie in [0, 1]");
    if (!(p.mutation >= 0 && p.mutation <= 1)) throw Error(ErrorCode::validation, "mutation probability must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// encoding

struct Genome {
    int h_exp = 0;
    int l_exp = 0;
    int k_idx = 0;

    auto operator<=>(const Genome&) const = default;
};

inline std::vector<std::int64_t> divisors(std::int64_t v) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = 1; d <= v; ++d)
        if (v % d == 0) out.push_back(d);
    return out;
}

inline int floor_log2(std::int64_t v) { return v < 1 ? -1 : clog2(v + 1) - 1; }

struct GeneRanges {
    int h_max_exp = 0;
    int l_max_exp = 0;
    std::vector<std::int64_t> k_values;
};

inline GeneRanges gene_ranges(const DcimSpec& spec) {
    return {floor_log2(spec.bounds.h_max), floor_log2(spec.bounds.l_max), divisors(spec.precision.bx)};
}

namespace detail {

inline bool satisfies_bounds(const DcimSpec& spec, std::int64_t h, std::int64_t l, std::int64_t& n_out) {
    const std::int64_t bw = spec.precision.bw;
    const std::int64_t bits = spec.w_store * bw;
    if (bits % (h * l) != 0) return false;
    const std::int64_t n = bits / (h * l);
    n_out = n;
    return n >= 1 && n % bw == 0 && n > spec.bounds.n_min_factor * bw && l <= spec.bounds.l_max &&
           h <= spec.bounds.h_max;
}

}  // namespace detail

// Sets N from the capacity equality. A non-integral N is infeasible outright;
// a bound-violating integral N is walked toward feasibility by unit steps in
// log2 H first, then log2 L.
inline std::optional<DesignPoint> repair_to_feasible(const Genome& g, const DcimSpec& spec, Arch arch) {
    const auto& p = spec.precision;
    const auto kv = divisors(p.bx);
    if (g.k_idx < 0 || g.k_idx >= static_cast<int>(kv.size()) || g.h_exp < 0 || g.l_exp < 0 || g.h_exp + g.l_exp > 62)
        return std::nullopt;
    const std::int64_t k = kv[static_cast<std::size_t>(g.k_idx)];
    int he = g.h_exp, le = g.l_exp;
    const std::int64_t bits = spec.w_store * p.bw;
    if (bits % ((std::int64_t{1} << he) * (std::int64_t{1} << le)) != 0) return std::nullopt;
    for (;;) {
        const std::int64_t h = std::int64_t{1} << he, l = std::int64_t{1} << le;
        std::int64_t n = 0;
        if (detail::satisfies_bounds(spec, h, l, n)) {
            DesignPoint dp{arch, n, h, l, k, p.bw, p.bx, p.be, p.bm};
            if (!design_violation(dp).empty()) return std::nullopt;
            return dp;
        }
        if (h > spec.bounds.h_max) --he;
        else if (l > spec.bounds.l_max) --le;
        else if (he > 0) --he;
        else if (le > 0) --le;
        else return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// archive

struct ArchiveEntry {
    DesignPoint design;
    CostVector cost;
};

struct ArchiveMeta {
    std::string spec_hash;
    std::uint64_t seed = 0;
    int generations = 0;
    std::string method;  // "nsga2" or "enumerate"
};

struct ParetoArchive {
    std::vector<ArchiveEntry> entries;
    ArchiveMeta meta;

    std::vector<CostVector> costs() const {
        std::vector<CostVector> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.cost);
        return out;
    }
};

inline auto order_key(const ArchiveEntry& e) {
    return std::make_tuple(e.cost.area, e.cost.delay, e.cost.energy, -e.cost.throughput, e.design.n, e.design.h,
                           e.design.l, e.design.k, static_cast<int>(e.design.arch));
}

inline void canonical_sort(std::vector<ArchiveEntry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const ArchiveEntry& a, const ArchiveEntry& b) { return order_key(a) < order_key(b); });
}

// Drops dominated entries and duplicate designs, then sorts canonically.
inline std::vector<ArchiveEntry> nondominated(std::vector<ArchiveEntry> entries) {
    canonical_sort(entries);
    entries.erase(std::unique(entries.begin(), entries.end(),
                              [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.design == b.design; }),
                  entries.end());
    std::vector<ArchiveEntry> keep;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < entries.size() && !dominated; ++j)
            dominated = j != i && dominates(entries[j].cost, entries[i].cost);
        if (!dominated) keep.push_back(entries[i]);
    }
    return keep;
}

// ---------------------------------------------------------------------------
// evaluation

// Runs fn(i) for i in [0, n) on `jobs` workers. fn must only write slot i.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(jobs < 1 ? 1 : static_cast<std::size_t>(jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct Evaluated {
    std::optional<DesignPoint> design;
    CostVector cost;
};

inline std::vector<Evaluated> evaluate_all(const std::vector<Genome>& genomes, const DcimSpec& spec, Arch arch,
                                           const TechLibrary& lib, int jobs) {
    std::vector<Evaluated> out(genomes.size());
    parallel_for(genomes.size(), jobs, [&](std::size_t i) {
        out[i].design = repair_to_feasible(genomes[i], spec, arch);
        if (out[i].design) out[i].cost = macro_cost(lib, *out[i].design, spec.activity);
    });
    return out;
}

inline std::vector<Genome> full_grid(const DcimSpec& spec) {
    const auto r = gene_ranges(spec);
    std::vector<Genome> grid;
    for (int h = 0; h <= r.h_max_exp; ++h)
        for (int l = 0; l <= r.l_max_exp; ++l)
            for (int k = 0; k < static_cast<int>(r.k_values.size()); ++k) grid.push_back({h, l, k});
    return grid;
}

[[noreturn]] inline void throw_no_feasible(const DcimSpec& spec) {
    std::ostringstream os;
    os << "no feasible design for w_store=" << spec.w_store << " precision=" << spec.precision.name
       << " under bounds N > " << spec.bounds.n_min_factor << "*Bw (=" << spec.bounds.n_min_factor * spec.precision.bw
       << "), L <= " << spec.bounds.l_max << ", H <= " << spec.bounds.h_max;
    throw Error(ErrorCode::no_feasible_design, os.str());
}

// ---------------------------------------------------------------------------
// exhaustive oracle

inline constexpr std::size_t default_enumeration_cap = 1'000'000;

inline ParetoArchive enumerate_bruteforce(const DcimSpec& spec, const TechLibrary& lib = {},
                                          std::size_t cap = default_enumeration_cap, int jobs = 1) {
    validate(spec);
    const auto grid = full_grid(spec);
    const auto archs = spec.active_archs();
    if (grid.size() * archs.size() > cap)
        throw Error(ErrorCode::cap_exceeded, "design grid of " + std::to_string(grid.size() * archs.size()) +
                                                 " points exceeds the enumeration cap of " + std::to_string(cap));
    std::vector<ArchiveEntry> all;
    for (auto arch : archs)
        for (const auto& e : evaluate_all(grid, spec, arch, lib, jobs))
            if (e.design) all.push_back({*e.design, e.cost});
    if (all.empty()) throw_no_feasible(spec);
    ParetoArchive archive;
    archive.entries = nondominated(std::move(all));
    archive.meta = {spec_hash(spec), 0, 0, "enumerate"};
    return archive;
}

// All distinct feasible designs reachable on the grid (the repaired image).
inline std::vector<ArchiveEntry> feasible_designs(const DcimSpec& spec, const TechLibrary& lib = {}, int jobs = 1) {
    std::vector<ArchiveEntry> all;
    for (auto arch : spec.active_archs())
        for (const auto& e : evaluate_all(full_grid(spec), spec, arch, lib, jobs))
            if (e.design) all.push_back({*e.design, e.cost});
    canonical_sort(all);
    all.erase(std::unique(all.begin(), all.end(),
                          [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.design == b.design; }),
              all.end());
    return all;
}

// ---------------------------------------------------------------------------
// NSGA-II

// mt19937_64 is fully specified by the standard; the mappings below avoid the
// implementation-defined std distributions so streams are portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do x = engine_();
        while (x >= limit);
        return x % n;
    }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

namespace detail {

struct Individual {
    Genome genome;
    std::optional<DesignPoint> design;
    CostVector cost;
    int rank = 0;
    double crowding = 0;
};

inline bool better(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

inline void assign_rank_and_crowding(std::vector<Individual>& pop) {
    constexpr int infeasible_rank = std::numeric_limits<int>::max();
    std::vector<std::size_t> feasible;
    std::vector<CostVector> costs;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop[i].design) {
            feasible.push_back(i);
            costs.push_back(pop[i].cost);
        } else {
            pop[i].rank = infeasible_rank;
            pop[i].crowding = 0;
        }
    }
    const auto fronts = fast_nondominated_sort(std::span<const CostVector>(costs));
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        std::vector<CostVector> front_costs;
        for (auto idx : fronts[f]) front_costs.push_back(costs[idx]);
        const auto dist = crowding_distance(std::span<const CostVector>(front_costs));
        for (std::size_t j = 0; j < fronts[f].size(); ++j) {
            auto& ind = pop[feasible[fronts[f][j]]];
            ind.rank = static_cast<int>(f);
            ind.crowding = dist[j];
        }
    }
}

inline auto survivor_key(const Individual& ind) {
    const DesignPoint dp = ind.design.value_or(DesignPoint{});
    return std::make_tuple(ind.rank, -ind.crowding, ind.cost.area, ind.cost.delay, ind.cost.energy,
                           -ind.cost.throughput, dp.n, dp.h, dp.l, dp.k, ind.genome);
}

class ExternalArchive {
public:
    // Returns true if the archive changed.
    bool offer(const DesignPoint& dp, const CostVector& c) {
        for (const auto& e : entries_)
            if (e.design == dp || dominates(e.cost, c)) return false;
        std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(c, e.cost); });
        entries_.push_back({dp, c});
        return true;
    }
    const std::vector<ArchiveEntry>& entries() const { return entries_; }

private:
    std::vector<ArchiveEntry> entries_;
};

}  // namespace detail

using GenerationObserver = std::function<void(int generation, const std::vector<ArchiveEntry>& archive)>;

// Per-architecture NSGA-II (binary tournament on rank/crowding, uniform
// crossover, per-gene +-1 mutation, repair, elitist (mu+lambda) survival).
// Every evaluated non-dominated design is kept in an external archive; the
// per-architecture archives are merged and re-filtered by dominance.
inline ParetoArchive nsga2_evolve(const DcimSpec& spec, const GaParams& params, const TechLibrary& lib = {},
                                  int jobs = 1, const GenerationObserver& observer = {}) {
    validate(spec);
    validate(params);
    const auto ranges = gene_ranges(spec);
    const auto archs = spec.active_archs();

    // precondition: the feasible set is non-empty
    bool any_feasible = false;
    for (auto arch : archs)
        for (const auto& g : full_grid(spec))
            if (repair_to_feasible(g, spec, arch)) {
                any_feasible = true;
                break;
            }
    if (!any_feasible) throw_no_feasible(spec);

    Rng rng(params.seed);
    const int k_count = static_cast<int>(ranges.k_values.size());
    auto random_genome = [&] {
        Genome g;
        g.h_exp = static_cast<int>(rng.below(static_cast<std::uint64_t>(ranges.h_max_exp + 1)));
        g.l_exp = static_cast<int>(rng.below(static_cast<std::uint64_t>(ranges.l_max_exp + 1)));
        g.k_idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(k_count)));
        return g;
    };
    auto mutate_gene = [&](int& gene, int hi) {
        if (hi == 0) return;
        int step = rng.chance(0.5) ? 1 : -1;
        if (gene + step < 0 || gene + step > hi) step = -step;
        gene += step;
    };

    std::vector<ArchiveEntry> merged;
    const std::size_t mu = static_cast<std::size_t>(params.population);

    for (auto arch : archs) {
        detail::ExternalArchive archive;
        auto evaluate = [&](std::vector<detail::Individual>& inds, std::size_t from) {
            std::vector<Genome> genomes;
            for (std::size_t i = from; i < inds.size(); ++i) genomes.push_back(inds[i].genome);
            const auto results = evaluate_all(genomes, spec, arch, lib, jobs);
            for (std::size_t i = 0; i < results.size(); ++i) {
                inds[from + i].design = results[i].design;
                inds[from + i].cost = results[i].cost;
                if (results[i].design) archive.offer(*results[i].design, results[i].cost);
            }
        };

        std::vector<detail::Individual> pop(mu);
        for (auto& ind : pop) ind.genome = random_genome();
        evaluate(pop, 0);
        detail::assign_rank_and_crowding(pop);
        if (observer) observer(0, archive.entries());

        for (int gen = 1; gen <= params.generations; ++gen) {
            auto tournament = [&]() -> const detail::Individual& {
                const auto& a = pop[rng.below(mu)];
                const auto& b = pop[rng.below(mu)];
                return detail::better(b, a) ? b : a;
            };
            std::vector<detail::Individual> next = pop;
            next.reserve(2 * mu);
            while (next.size() < 2 * mu) {
                Genome c1 = tournament().genome;
                Genome c2 = tournament().genome;
                if (rng.chance(params.crossover)) {
                    if (rng.chance(0.5)) std::swap(c1.h_exp, c2.h_exp);
                    if (rng.chance(0.5)) std::swap(c1.l_exp, c2.l_exp);
                    if (rng.chance(0.5)) std::swap(c1.k_idx, c2.k_idx);
                }
                for (Genome* c : {&c1, &c2}) {
                    if (rng.chance(params.mutation)) mutate_gene(c->h_exp, ranges.h_max_exp);
                    if (rng.chance(params.mutation)) mutate_gene(c->l_exp, ranges.l_max_exp);
                    if (rng.chance(params.mutation)) mutate_gene(c->k_idx, k_count - 1);
                }
                next.push_back({c1, std::nullopt, {}, 0, 0});
                next.push_back({c2, std::nullopt, {}, 0, 0});
            }
            evaluate(next, mu);
            detail::assign_rank_and_crowding(next);
            std::sort(next.begin(), next.end(), [](const detail::Individual& a, const detail::Individual& b) {
                return detail::survivor_key(a) < detail::survivor_key(b);
            });
            next.resize(mu);
            pop = std::move(next);
            detail::assign_rank_and_crowding(pop);
            if (observer) observer(gen, archive.entries());
        }
        merged.insert(merged.end(), archive.entries().begin(), archive.entries().end());
    }

    ParetoArchive out;
    out.entries = nondominated(std::move(merged));
    out.meta = {spec_hash(spec), params.seed, params.generations, "nsga2"};
    return out;
}

}  // namespace dcim::dse
