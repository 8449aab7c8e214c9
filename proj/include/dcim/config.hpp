#pragma once

// Run configuration: key-value file plus command-line overrides, resolved
// into validated domain objects before any work starts.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "dcim/costmodel.hpp"
#include "dcim/dse.hpp"
#include "dcim/error.hpp"
#include "dcim/keyvalue.hpp"
#include "dcim/techlib.hpp"

namespace dcim::cfg {

inline constexpr const char* techlib_env = "DCIM_TECHLIB";

// metric op value, e.g. "area<=5000" or "tops_per_w>=10"
struct Filter {
    std::string metric;
    std::string op;
    double value = 0;
    std::string text;
};

struct DesignOverride {
    std::optional<std::int64_t> n, h, l, k;
    bool any() const { return n || h || l || k; }
};

struct RunConfig {
    dse::DcimSpec spec;
    dse::GaParams ga;
    std::string tech_path;  // empty: built-in table
    TechLibrary tech;
    std::string out_dir = "dcim_out";
    int jobs = 1;
    std::size_t enumerate_cap = dse::default_enumeration_cap;
    std::vector<Filter> filters;
    std::vector<std::string> select;  // design tags
    DesignOverride design;
    std::int64_t generate_limit = 8;
    std::int64_t simulate_trials = 1000;
    std::uint64_t simulate_seed = 1;
    bool emit_plot_data = false;
};

inline const std::vector<std::string>& filter_metrics() {
    static const std::vector<std::string> m = {"area", "delay", "energy", "throughput", "area_um2", "delay_ps",
                                               "energy_fj", "tops_per_w", "tops_per_mm2", "N", "H", "L", "k"};
    return m;
}

inline Filter parse_filter(const std::string& text, const std::string& key = "filter", int line = 0) {
    static const char* ops[] = {"<=", ">=", "==", "<", ">"};
    for (const char* op : ops) {
        const auto pos = text.find(op);
        if (pos == std::string::npos) continue;
        Filter f;
        f.metric = std::string(kv::detail::trim(std::string_view(text).substr(0, pos)));
        f.op = op;
        const auto rhs = kv::detail::trim(std::string_view(text).substr(pos + std::string_view(op).size()));
        f.text = text;
        auto [p, ec] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), f.value);
        if (ec != std::errc() || p != rhs.data() + rhs.size() || rhs.empty())
            throw ConfigError(ErrorCode::validation, key, line, "filter '" + text + "': value is not a number");
        if (std::find(filter_metrics().begin(), filter_metrics().end(), f.metric) == filter_metrics().end())
            throw ConfigError(ErrorCode::validation, key, line, "filter '" + text + "': unknown metric '" + f.metric + "'");
        return f;
    }
    throw ConfigError(ErrorCode::validation, key, line, "filter '" + text + "' needs one of <=, >=, ==, <, >");
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find(sep, pos);
        const auto item = kv::detail::trim(std::string_view(s).substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (!item.empty()) out.emplace_back(item);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

namespace detail {

[[noreturn]] inline void invalid(const kv::Entry& e, const std::string& what) {
    throw ConfigError(ErrorCode::validation, e.key, e.line,
                      (e.line > 0 ? "line " + std::to_string(e.line) + ": " : std::string()) + "'" + e.key + "' " + what);
}

inline std::int64_t positive(const kv::Entry& e) {
    const auto v = kv::as_integer(e);
    if (v < 1) invalid(e, "must be >= 1");
    return v;
}

inline double probability(const kv::Entry& e) {
    const auto v = kv::as_number(e);
    if (!(v >= 0 && v <= 1)) invalid(e, "must lie in [0, 1]");
    return v;
}

}  // namespace detail

// Resolves entries into a RunConfig. Unknown keys are rejected.
inline RunConfig resolve(const std::vector<kv::Entry>& entries) {
    RunConfig cfg;
    const kv::Entry* w_store = nullptr;
    const kv::Entry* precision = nullptr;
    const kv::Entry* arch = nullptr;
    for (const auto& e : entries) {
        const auto& k = e.key;
        if (k == "w_store") w_store = &e;
        else if (k == "precision") precision = &e;
        else if (k == "arch") arch = &e;
        else if (k == "bounds.n_min_factor") {
            const auto v = kv::as_integer(e);
            if (v < 0) detail::invalid(e, "must be >= 0");
            cfg.spec.bounds.n_min_factor = static_cast<int>(v);
        } else if (k == "bounds.l_max") cfg.spec.bounds.l_max = detail::positive(e);
        else if (k == "bounds.h_max") cfg.spec.bounds.h_max = detail::positive(e);
        else if (k == "activity") {
            const auto v = kv::as_number(e);
            if (!(v > 0 && v <= 1)) detail::invalid(e, "must lie in (0, 1]");
            cfg.spec.activity = v;
        } else if (k == "ga.population") {
            const auto v = kv::as_integer(e);
            if (v < 4 || v % 2 != 0 || v > 1'000'000) detail::invalid(e, "must be even and >= 4");
            cfg.ga.population = static_cast<int>(v);
        } else if (k == "ga.generations") {
            const auto v = kv::as_integer(e);
            if (v < 0 || v > 1'000'000) detail::invalid(e, "must be >= 0");
            cfg.ga.generations = static_cast<int>(v);
        } else if (k == "ga.crossover") cfg.ga.crossover = detail::probability(e);
        else if (k == "ga.mutation") cfg.ga.mutation = detail::probability(e);
        else if (k == "ga.seed") {
            const auto v = kv::as_integer(e);
            if (v < 0) detail::invalid(e, "must be >= 0");
            cfg.ga.seed = static_cast<std::uint64_t>(v);
        } else if (k == "tech.path") cfg.tech_path = kv::as_string(e);
        else if (k == "output.dir") cfg.out_dir = kv::as_string(e);
        else if (k == "output.plot_data") cfg.emit_plot_data = kv::as_bool(e);
        else if (k == "jobs") {
            const auto v = detail::positive(e);
            if (v > 256) detail::invalid(e, "must be <= 256");
            cfg.jobs = static_cast<int>(v);
        } else if (k == "enumerate.cap") cfg.enumerate_cap = static_cast<std::size_t>(detail::positive(e));
        else if (k == "filter") {
            for (const auto& f : split_list(kv::as_string(e), ';')) cfg.filters.push_back(parse_filter(f, e.key, e.line));
        } else if (k == "select") cfg.select = split_list(kv::as_string(e), ',');
        else if (k == "design.N") cfg.design.n = detail::positive(e);
        else if (k == "design.H") cfg.design.h = detail::positive(e);
        else if (k == "design.L") cfg.design.l = detail::positive(e);
        else if (k == "design.k") cfg.design.k = detail::positive(e);
        else if (k == "generate.limit") cfg.generate_limit = detail::positive(e);
        else if (k == "simulate.trials") cfg.simulate_trials = detail::positive(e);
        else if (k == "simulate.seed") {
            const auto v = kv::as_integer(e);
            if (v < 0) detail::invalid(e, "must be >= 0");
            cfg.simulate_seed = static_cast<std::uint64_t>(v);
        } else {
            throw ConfigError(ErrorCode::validation, k, e.line,
                              (e.line > 0 ? "line " + std::to_string(e.line) + ": " : std::string()) +
                                  "unknown key '" + k + "'");
        }
    }

    if (!w_store) throw ConfigError(ErrorCode::validation, "w_store", 0, "missing required key 'w_store'");
    cfg.spec.w_store = kv::as_integer(*w_store);
    if (cfg.spec.w_store < 1) detail::invalid(*w_store, "must be >= 1");
    if (cfg.spec.w_store > (std::int64_t{1} << 40)) detail::invalid(*w_store, "must be <= 2^40");

    if (!precision) throw ConfigError(ErrorCode::validation, "precision", 0, "missing required key 'precision'");
    const auto p = find_precision(kv::as_string(*precision));
    if (!p) {
        std::string names;
        for (const auto& q : precision_presets()) names += (names.empty() ? "" : ", ") + q.name;
        detail::invalid(*precision, "names no preset (known: " + names + ")");
    }
    cfg.spec.precision = *p;

    if (arch) {
        for (const auto& name : split_list(kv::as_string(*arch), ',')) {
            const auto a = arch_from_name(name);
            if (!a) detail::invalid(*arch, "lists unknown architecture '" + name + "' (use int, fp)");
            cfg.spec.archs.push_back(*a);
        }
        if (cfg.spec.archs.empty()) detail::invalid(*arch, "is empty");
        if (cfg.spec.active_archs().empty())
            detail::invalid(*arch, "enables no architecture able to run " + p->name);
    }

    if (cfg.tech_path.empty())
        if (const char* env = std::getenv(techlib_env); env && *env) cfg.tech_path = env;
    if (!cfg.tech_path.empty()) cfg.tech = load_tech_library_file(cfg.tech_path);

    dse::validate(cfg.spec);
    dse::validate(cfg.ga);
    return cfg;
}

// Replaces (or appends) file entries with command-line `key=value` overrides.
// Bare words are taken as strings.
inline std::vector<kv::Entry> apply_overrides(std::vector<kv::Entry> entries, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ErrorCode::parse, s, 0, "--set expects key=value, got '" + s + "'");
        const std::string key(kv::detail::trim(std::string_view(s).substr(0, eq)));
        std::string value(kv::detail::trim(std::string_view(s).substr(eq + 1)));
        const bool literal = !value.empty() && (value.front() == '"' || value == "true" || value == "false" ||
                                                kv::detail::is_integer(value) || kv::detail::is_number(value));
        if (!literal) value = "\"" + value + "\"";
        auto parsed = kv::parse(key + " = " + value, "--set");
        parsed[0].line = 0;
        std::erase_if(entries, [&](const kv::Entry& e) { return e.key == parsed[0].key; });
        entries.push_back(parsed[0]);
    }
    return entries;
}

inline RunConfig load_spec_config(const std::string& path, const std::vector<std::string>& sets = {}) {
    std::vector<kv::Entry> entries;
    if (!path.empty()) entries = kv::parse_file(path);
    return resolve(apply_overrides(std::move(entries), sets));
}

inline RunConfig load_spec_text(const std::string& text, const std::vector<std::string>& sets = {}) {
    return resolve(apply_overrides(kv::parse(text), sets));
}

// Explicit design from design.N/H/L/k, widths from the precision preset.
inline DesignPoint explicit_design(const RunConfig& cfg) {
    const auto& d = cfg.design;
    if (!d.n || !d.h || !d.l || !d.k)
        throw ConfigError(ErrorCode::validation, "design", 0, "design.N, design.H, design.L and design.k are all required");
    const auto dp = make_design(cfg.spec.precision, *d.n, *d.h, *d.l, *d.k);
    require_valid(dp);
    return dp;
}

}  // namespace dcim::cfg
