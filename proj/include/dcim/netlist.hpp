#pragma once

// Bit-level hierarchical netlist, plus the analyses run on it: structural
// checks, cell tally, stage longest-path timing and a two-valued evaluator.
//
// Net numbering inside a module: 0 is constant 0, 1 is constant 1, then every
// port bit in declaration order (LSB first), then internal nets.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcim/error.hpp"
#include "dcim/techlib.hpp"

namespace dcim::rtl {

using Net = std::int32_t;
using Bus = std::vector<Net>;

inline constexpr Net const0 = 0;
inline constexpr Net const1 = 1;

enum class PortDir { input, output };

enum class Stage { pre_array, array_to_accu, fusion_out };

inline constexpr std::array<Stage, 3> all_stages = {Stage::pre_array, Stage::array_to_accu, Stage::fusion_out};

inline constexpr std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::pre_array: return "PreArray";
        case Stage::array_to_accu: return "ArrayToAccu";
        case Stage::fusion_out: return "FusionOut";
    }
    return "?";
}

inline std::optional<Stage> stage_from_name(std::string_view s) {
    for (auto st : all_stages)
        if (stage_name(st) == s) return st;
    return std::nullopt;
}

struct Port {
    std::string name;
    PortDir dir = PortDir::input;
    int width = 1;
    std::string stage;  // endpoint tag for output ports, may be empty
    bool operator==(const Port&) const = default;
};

struct Binding {
    std::string port;
    Bus nets;  // LSB first
    bool operator==(const Binding&) const = default;
};

struct Instance {
    std::string id;
    std::string type;  // primitive cell or module name
    std::vector<Binding> pins;
    std::string stage;  // endpoint tag on registers
    bool operator==(const Instance&) const = default;
};

struct Assign {
    Net dst = 0;
    Net src = 0;
    bool operator==(const Assign&) const = default;
};

struct Module {
    std::string name;
    std::vector<Port> ports;
    Net internal = 0;  // number of internal nets
    std::vector<Instance> instances;
    std::vector<Assign> assigns;
    std::string timing_arc;  // "<logic>:<width>" on characterized templates

    Net port_bits() const {
        Net n = 0;
        for (const auto& p : ports) n += p.width;
        return n;
    }
    Net net_count() const { return 2 + port_bits() + internal; }
    Net first_internal() const { return 2 + port_bits(); }

    const Port* port(std::string_view n) const {
        for (const auto& p : ports)
            if (p.name == n) return &p;
        return nullptr;
    }
    Net port_base(std::string_view n) const {
        Net base = 2;
        for (const auto& p : ports) {
            if (p.name == n) return base;
            base += p.width;
        }
        throw Error(ErrorCode::structural, "module " + name + " has no port " + std::string(n));
    }
    Bus port_nets(std::string_view n) const {
        const Net base = port_base(n);
        Bus b;
        for (int i = 0; i < port(n)->width; ++i) b.push_back(base + i);
        return b;
    }
    bool operator==(const Module&) const = default;
};

struct Netlist {
    std::vector<Module> modules;  // sorted by name
    std::string top;

    const Module* find(std::string_view name) const {
        auto it = std::lower_bound(modules.begin(), modules.end(), name,
                                   [](const Module& m, std::string_view n) { return m.name < n; });
        return it != modules.end() && it->name == name ? &*it : nullptr;
    }
    const Module& top_module() const {
        const auto* m = find(top);
        if (!m) throw Error(ErrorCode::structural, "top module " + top + " is missing");
        return *m;
    }
    bool operator==(const Netlist&) const = default;
};

// ---------------------------------------------------------------------------
// primitives

struct PrimitivePins {
    std::vector<std::string_view> inputs;
    std::vector<std::string_view> outputs;
};

inline std::string_view primitive_name(CellKind k) {
    switch (k) {
        case CellKind::nor2: return "NOR2";
        case CellKind::or2: return "OR2";
        case CellKind::mux2: return "MUX2";
        case CellKind::ha: return "HA";
        case CellKind::fa: return "FA";
        case CellKind::dff: return "DFF";
        case CellKind::sram: return "SRAM6T";
    }
    return "?";
}

inline std::optional<CellKind> primitive_kind(std::string_view name) {
    for (auto k : all_cell_kinds)
        if (primitive_name(k) == name) return k;
    return std::nullopt;
}

inline const PrimitivePins& primitive_pins(CellKind k) {
    static const std::array<PrimitivePins, 7> pins = {{
        {{"A", "B"}, {"Y"}},
        {{"A", "B"}, {"Y"}},
        {{"A", "B", "S"}, {"Y"}},  // Y = S ? B : A
        {{"A", "B"}, {"S", "CO"}},
        {{"A", "B", "CI"}, {"S", "CO"}},
        {{"CK", "D"}, {"Q", "QN"}},
        {{}, {"Q", "QB"}},
    }};
    return pins[static_cast<std::size_t>(k)];
}

inline bool is_sequential(CellKind k) { return k == CellKind::dff || k == CellKind::sram; }

// ---------------------------------------------------------------------------
// builder

class ModuleBuilder {
public:
    explicit ModuleBuilder(std::string name) { m_.name = std::move(name); }

    // Ports must be declared before any internal net. Zero-width ports are
    // dropped and yield an empty bus.
    Bus input(const std::string& name, int width) { return add_port(name, PortDir::input, width, ""); }
    Bus output(const std::string& name, int width, const std::string& stage = "") {
        return add_port(name, PortDir::output, width, stage);
    }

    Net wire() {
        sealed_ = true;
        return m_.first_internal() + m_.internal++;
    }
    Bus wires(std::int64_t count) {
        Bus b;
        for (std::int64_t i = 0; i < count; ++i) b.push_back(wire());
        return b;
    }

    void set_timing_arc(std::string arc) { m_.timing_arc = std::move(arc); }

    void instance(std::string id, std::string type, std::vector<Binding> pins, std::string stage = "") {
        std::erase_if(pins, [](const Binding& b) { return b.nets.empty(); });
        m_.instances.push_back({std::move(id), std::move(type), std::move(pins), std::move(stage)});
    }

    // Single-bit primitive; pins bound in primitive_pins order.
    void cell(CellKind kind, std::string id, std::initializer_list<Net> ins, std::initializer_list<Net> outs,
              std::string stage = "") {
        const auto& pp = primitive_pins(kind);
        if (ins.size() != pp.inputs.size() || outs.size() != pp.outputs.size())
            throw Error(ErrorCode::structural, "pin count mismatch on " + std::string(primitive_name(kind)));
        std::vector<Binding> pins;
        auto in = ins.begin();
        for (auto p : pp.inputs) pins.push_back({std::string(p), {*in++}});
        auto out = outs.begin();
        for (auto p : pp.outputs) pins.push_back({std::string(p), {*out++}});
        instance(std::move(id), std::string(primitive_name(kind)), std::move(pins), std::move(stage));
    }

    void assign(Net dst, Net src) { m_.assigns.push_back({dst, src}); }
    void assign(const Bus& dst, const Bus& src) {
        if (dst.size() != src.size()) throw Error(ErrorCode::structural, "assign width mismatch in " + m_.name);
        for (std::size_t i = 0; i < dst.size(); ++i) assign(dst[i], src[i]);
    }

    Module finish() {
        std::stable_sort(m_.instances.begin(), m_.instances.end(),
                         [](const Instance& a, const Instance& b) { return a.id < b.id; });
        return std::move(m_);
    }

private:
    Bus add_port(const std::string& name, PortDir dir, int width, const std::string& stage) {
        if (sealed_) throw Error(ErrorCode::structural, "port " + name + " declared after internal nets");
        if (width <= 0) return {};
        const Net base = 2 + m_.port_bits();
        m_.ports.push_back({name, dir, width, stage});
        Bus b;
        for (int i = 0; i < width; ++i) b.push_back(base + i);
        return b;
    }

    Module m_;
    bool sealed_ = false;
};

// Bits [lo, lo+count) of a bus, padded with const0 past its end.
inline Bus slice(const Bus& b, std::int64_t lo, std::int64_t count) {
    Bus out;
    for (std::int64_t i = lo; i < lo + count; ++i)
        out.push_back(i >= 0 && i < static_cast<std::int64_t>(b.size()) ? b[static_cast<std::size_t>(i)] : const0);
    return out;
}

inline Bus concat(Bus a, const Bus& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---------------------------------------------------------------------------
// structural checks

namespace detail {

// Port directions of a primitive or module type, in binding order.
inline std::vector<std::pair<std::string, std::pair<PortDir, int>>> type_ports(const Netlist& nl,
                                                                             std::string_view type) {
    std::vector<std::pair<std::string, std::pair<PortDir, int>>> out;
    if (auto k = primitive_kind(type)) {
        for (auto p : primitive_pins(*k).inputs) out.push_back({std::string(p), {PortDir::input, 1}});
        for (auto p : primitive_pins(*k).outputs) out.push_back({std::string(p), {PortDir::output, 1}});
        return out;
    }
    const Module* m = nl.find(type);
    if (!m) throw Error(ErrorCode::structural, "unknown cell or module type " + std::string(type));
    for (const auto& p : m->ports) out.push_back({p.name, {p.dir, p.width}});
    return out;
}

}  // namespace detail

// Throws a structural error describing the first violation found.
inline void validate_netlist(const Netlist& nl) {
    for (std::size_t i = 1; i < nl.modules.size(); ++i)
        if (!(nl.modules[i - 1].name < nl.modules[i].name))
            throw Error(ErrorCode::structural, "module list not sorted or has duplicates at " + nl.modules[i].name);
    nl.top_module();

    // hierarchy must be acyclic
    std::map<std::string, int> state;
    std::function<void(const Module&)> visit = [&](const Module& m) {
        auto& s = state[m.name];
        if (s == 2) return;
        if (s == 1) throw Error(ErrorCode::structural, "recursive instantiation through " + m.name);
        s = 1;
        for (const auto& inst : m.instances)
            if (!primitive_kind(inst.type)) {
                const Module* child = nl.find(inst.type);
                if (!child) throw Error(ErrorCode::structural, "unknown type " + inst.type + " in " + m.name);
                visit(*child);
            }
        state[m.name] = 2;
    };
    visit(nl.top_module());
    for (const auto& m : nl.modules)
        if (!state.count(m.name)) throw Error(ErrorCode::structural, "module " + m.name + " is never instantiated");

    for (const auto& m : nl.modules) {
        const Net total = m.net_count();
        std::vector<int> drivers(static_cast<std::size_t>(total), 0);
        drivers[const0] = drivers[const1] = 1;
        Net base = 2;
        for (const auto& p : m.ports) {
            if (p.width < 1) throw Error(ErrorCode::structural, "port " + p.name + " has no bits in " + m.name);
            if (!p.stage.empty() && !stage_from_name(p.stage))
                throw Error(ErrorCode::structural, "unknown stage tag " + p.stage);
            if (p.dir == PortDir::input)
                for (int i = 0; i < p.width; ++i) drivers[static_cast<std::size_t>(base + i)] = 1;
            base += p.width;
        }
        auto check_net = [&](Net n, const std::string& where) {
            if (n < 0 || n >= total) throw Error(ErrorCode::structural, "net out of range at " + where);
        };
        std::vector<Net> reads;
        std::set<std::string> ids;
        for (const auto& inst : m.instances) {
            const std::string where = m.name + "/" + inst.id;
            if (!ids.insert(inst.id).second) throw Error(ErrorCode::structural, "duplicate instance id " + where);
            if (!inst.stage.empty() && !stage_from_name(inst.stage))
                throw Error(ErrorCode::structural, "unknown stage tag on " + where);
            const auto ports = detail::type_ports(nl, inst.type);
            if (inst.pins.size() != ports.size())
                throw Error(ErrorCode::structural, "unbound or extra pins on " + where);
            for (const auto& [pname, info] : ports) {
                auto it = std::find_if(inst.pins.begin(), inst.pins.end(),
                                       [&](const Binding& b) { return b.port == pname; });
                if (it == inst.pins.end()) throw Error(ErrorCode::structural, "pin " + pname + " unbound on " + where);
                if (static_cast<int>(it->nets.size()) != info.second)
                    throw Error(ErrorCode::structural, "width mismatch on pin " + pname + " of " + where);
                for (Net n : it->nets) {
                    check_net(n, where);
                    if (info.first == PortDir::output) ++drivers[static_cast<std::size_t>(n)];
                    else reads.push_back(n);
                }
            }
        }
        for (const auto& a : m.assigns) {
            check_net(a.dst, m.name + " assign");
            check_net(a.src, m.name + " assign");
            ++drivers[static_cast<std::size_t>(a.dst)];
            reads.push_back(a.src);
        }
        for (Net n = 0; n < total; ++n) {
            const int d = drivers[static_cast<std::size_t>(n)];
            if (d != 1)
                throw Error(ErrorCode::structural, "net " + std::to_string(n) + " in " + m.name + " has " +
                                                       std::to_string(d) + " drivers");
        }
        (void)reads;  // every net is driven, so no input can dangle
    }
}

// ---------------------------------------------------------------------------
// tally

struct CellTally {
    std::array<std::int64_t, 7> counts{};

    std::int64_t count(CellKind k) const { return counts[static_cast<std::size_t>(k)]; }
    std::int64_t& operator[](CellKind k) { return counts[static_cast<std::size_t>(k)]; }
    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
    CellTally& operator+=(const CellTally& o) {
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
        return *this;
    }
    CellTally operator+(const CellTally& o) const {
        CellTally t = *this;
        return t += o;
    }
    CellTally operator*(std::int64_t n) const {
        CellTally t = *this;
        for (auto& c : t.counts) c *= n;
        return t;
    }
    Fixed area(const TechLibrary& lib) const {
        Fixed a;
        for (auto k : all_cell_kinds) a += lib.cell(k).area * count(k);
        return a;
    }
    Fixed energy(const TechLibrary& lib) const {
        Fixed e;
        for (auto k : all_cell_kinds) e += lib.cell(k).energy * count(k);
        return e;
    }
    bool operator==(const CellTally&) const = default;
};

inline CellTally tally_module(const Netlist& nl, const Module& m, std::map<std::string, CellTally>& memo) {
    if (auto it = memo.find(m.name); it != memo.end()) return it->second;
    CellTally t;
    for (const auto& inst : m.instances) {
        if (auto k = primitive_kind(inst.type)) {
            ++t[*k];
        } else {
            const Module* child = nl.find(inst.type);
            if (!child) throw Error(ErrorCode::structural, "unknown type " + inst.type);
            t += tally_module(nl, *child, memo);
        }
    }
    memo[m.name] = t;
    return t;
}

inline CellTally tally_cells(const Netlist& nl, std::string_view module_name) {
    std::map<std::string, CellTally> memo;
    const Module* m = nl.find(module_name);
    if (!m) throw Error(ErrorCode::structural, "no module " + std::string(module_name));
    return tally_module(nl, *m, memo);
}

inline CellTally tally_cells(const Netlist& nl) {
    if (nl.modules.empty()) return {};
    return tally_cells(nl, nl.top);
}

// ---------------------------------------------------------------------------
// timing

// Characterized: modules carrying a timing arc are black boxes whose outputs
// all arrive at the latest data input plus the arc delay. Flat: every module
// is expanded down to cells.
enum class TimingMode { characterized, flat };

inline Fixed arc_delay(const TechLibrary& lib, std::string_view arc) {
    const auto colon = arc.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::structural, "malformed timing arc " + std::string(arc));
    const auto kind = logic_from_name(arc.substr(0, colon));
    std::int64_t width = 0;
    const auto digits = arc.substr(colon + 1);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), width);
    if (!kind || ec != std::errc() || p != digits.data() + digits.size())
        throw Error(ErrorCode::structural, "malformed timing arc " + std::string(arc));
    return logic_module_cost(lib, *kind, width).delay;
}

struct TimingResult {
    std::vector<Fixed> outputs;                   // per output port bit
    std::array<std::optional<Fixed>, 3> stages;   // latest endpoint arrival per stage
};

namespace detail {

inline void merge_stage(std::array<std::optional<Fixed>, 3>& into, std::size_t s, Fixed v) {
    into[s] = into[s] ? max(*into[s], v) : v;
}

class Timer {
public:
    Timer(const Netlist& nl, const TechLibrary& lib, TimingMode mode) : nl_(nl), lib_(lib), mode_(mode) {}

    TimingResult analyze(const Module& m, const std::vector<Fixed>& input_arrivals) {
        auto key = std::make_pair(m.name, raw(input_arrivals));
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        TimingResult r = compute(m, input_arrivals);
        memo_.emplace(std::move(key), r);
        return r;
    }

private:
    static std::vector<std::int64_t> raw(const std::vector<Fixed>& v) {
        std::vector<std::int64_t> out;
        out.reserve(v.size());
        for (auto f : v) out.push_back(f.raw());
        return out;
    }

    TimingResult compute(const Module& m, const std::vector<Fixed>& input_arrivals) {
        const auto total = static_cast<std::size_t>(m.net_count());
        std::vector<std::optional<Fixed>> arr(total);
        arr[const0] = arr[const1] = Fixed{};
        {
            Net base = 2;
            std::size_t k = 0;
            for (const auto& p : m.ports) {
                for (int i = 0; i < p.width; ++i)
                    if (p.dir == PortDir::input) arr[static_cast<std::size_t>(base + i)] = input_arrivals.at(k++);
                base += p.width;
            }
        }

        // nodes: instances then assigns
        const std::size_t ni = m.instances.size();
        const std::size_t nodes = ni + m.assigns.size();
        std::vector<std::vector<Net>> node_in(nodes), node_out(nodes);
        std::vector<bool> source(nodes, false);
        for (std::size_t i = 0; i < ni; ++i) {
            const auto& inst = m.instances[i];
            const auto ports = type_ports(nl_, inst.type);
            const auto kind = primitive_kind(inst.type);
            source[i] = kind && is_sequential(*kind);
            for (const auto& b : inst.pins) {
                auto it = std::find_if(ports.begin(), ports.end(), [&](const auto& p) { return p.first == b.port; });
                if (it == ports.end()) throw Error(ErrorCode::structural, "unknown pin " + b.port);
                auto& dst = it->second.first == PortDir::output ? node_out[i] : node_in[i];
                dst.insert(dst.end(), b.nets.begin(), b.nets.end());
            }
        }
        for (std::size_t a = 0; a < m.assigns.size(); ++a) {
            node_in[ni + a] = {m.assigns[a].src};
            node_out[ni + a] = {m.assigns[a].dst};
        }

        std::vector<std::int64_t> driver(total, -1);
        for (std::size_t n = 0; n < nodes; ++n)
            for (Net o : node_out[n]) driver[static_cast<std::size_t>(o)] = static_cast<std::int64_t>(n);

        // Kahn order; sequential cells have no combinational predecessors
        std::vector<std::vector<std::size_t>> succ(nodes);
        std::vector<std::size_t> indeg(nodes, 0);
        for (std::size_t n = 0; n < nodes; ++n) {
            if (source[n]) continue;
            std::set<std::size_t> preds;
            for (Net in : node_in[n])
                if (auto d = driver[static_cast<std::size_t>(in)]; d >= 0) preds.insert(static_cast<std::size_t>(d));
            for (auto p : preds) {
                succ[p].push_back(n);
                ++indeg[n];
            }
        }
        std::vector<std::size_t> order, ready;
        for (std::size_t n = 0; n < nodes; ++n)
            if (indeg[n] == 0) ready.push_back(n);
        while (!ready.empty()) {
            const auto n = ready.back();
            ready.pop_back();
            order.push_back(n);
            for (auto s : succ[n])
                if (--indeg[s] == 0) ready.push_back(s);
        }
        if (order.size() != nodes)
            throw Error(ErrorCode::structural, "combinational cycle in module " + m.name);

        TimingResult result;
        auto at = [&](Net n) { return arr[static_cast<std::size_t>(n)].value_or(Fixed{}); };
        auto latest = [&](const std::vector<Net>& nets) {
            Fixed t;
            for (Net n : nets) t = max(t, at(n));
            return t;
        };
        for (auto n : order) {
            if (n >= ni) {
                arr[static_cast<std::size_t>(node_out[n][0])] = at(node_in[n][0]);
                continue;
            }
            const auto& inst = m.instances[n];
            if (auto kind = primitive_kind(inst.type)) {
                const Fixed t = is_sequential(*kind) ? Fixed{} : latest(node_in[n]) + lib_.delay(*kind);
                for (Net o : node_out[n]) arr[static_cast<std::size_t>(o)] = t;
                continue;
            }
            const Module& child = *nl_.find(inst.type);
            if (mode_ == TimingMode::characterized && !child.timing_arc.empty()) {
                const Fixed t = latest(node_in[n]) + arc_delay(lib_, child.timing_arc);
                for (Net o : node_out[n]) arr[static_cast<std::size_t>(o)] = t;
                continue;
            }
            // child input arrivals in child port order
            std::vector<Fixed> child_in;
            for (const auto& p : child.ports) {
                if (p.dir != PortDir::input) continue;
                auto it = std::find_if(inst.pins.begin(), inst.pins.end(),
                                       [&](const Binding& b) { return b.port == p.name; });
                for (Net net : it->nets) child_in.push_back(at(net));
            }
            const auto sub = analyze(child, child_in);
            for (std::size_t s = 0; s < 3; ++s)
                if (sub.stages[s]) merge_stage(result.stages, s, *sub.stages[s]);
            std::size_t k = 0;
            for (const auto& p : child.ports) {
                if (p.dir != PortDir::output) continue;
                auto it = std::find_if(inst.pins.begin(), inst.pins.end(),
                                       [&](const Binding& b) { return b.port == p.name; });
                for (Net net : it->nets) arr[static_cast<std::size_t>(net)] = sub.outputs[k++];
            }
        }

        // register inputs are read once every node has been timed
        for (const auto& inst : m.instances) {
            if (inst.stage.empty() || primitive_kind(inst.type) != CellKind::dff) continue;
            for (const auto& b : inst.pins)
                if (b.port == "D")
                    merge_stage(result.stages, static_cast<std::size_t>(*stage_from_name(inst.stage)), at(b.nets[0]));
        }
        Net base = 2;
        for (const auto& p : m.ports) {
            if (p.dir == PortDir::output)
                for (int i = 0; i < p.width; ++i) {
                    const Fixed t = at(base + i);
                    result.outputs.push_back(t);
                    if (!p.stage.empty())
                        merge_stage(result.stages, static_cast<std::size_t>(*stage_from_name(p.stage)), t);
                }
            base += p.width;
        }
        return result;
    }

    const Netlist& nl_;
    const TechLibrary& lib_;
    TimingMode mode_;
    std::map<std::pair<std::string, std::vector<std::int64_t>>, TimingResult> memo_;
};

}  // namespace detail

// Latest arrival, in gate delays, at the endpoints tagged with each stage.
// Paths start at primary inputs and register/SRAM outputs (time 0).
inline std::array<Fixed, 3> stage_delays(const Netlist& nl, const TechLibrary& lib,
                                         TimingMode mode = TimingMode::characterized) {
    const Module& top = nl.top_module();
    std::vector<Fixed> inputs;
    for (const auto& p : top.ports)
        if (p.dir == PortDir::input) inputs.insert(inputs.end(), static_cast<std::size_t>(p.width), Fixed{});
    detail::Timer timer(nl, lib, mode);
    const auto r = timer.analyze(top, inputs);
    std::array<Fixed, 3> out{};
    for (std::size_t s = 0; s < 3; ++s) out[s] = r.stages[s].value_or(Fixed{});
    return out;
}

inline Fixed longest_path_delay(const Netlist& nl, const TechLibrary& lib, Stage stage,
                                TimingMode mode = TimingMode::characterized) {
    return stage_delays(nl, lib, mode)[static_cast<std::size_t>(stage)];
}

// ---------------------------------------------------------------------------
// flattening and two-valued evaluation

struct FlatCell {
    CellKind kind;
    std::string path;
    std::vector<std::size_t> in;   // global nets, primitive input order
    std::vector<std::size_t> out;  // primitive output order
};

struct FlatNetlist {
    std::size_t nets = 2;  // 0/1 constants
    std::vector<FlatCell> cells;
    std::vector<std::pair<std::size_t, std::size_t>> aliases;  // dst <- src
    std::map<std::string, std::vector<std::size_t>> ports;     // top port bits
};

inline FlatNetlist flatten(const Netlist& nl) {
    FlatNetlist flat;
    std::function<void(const Module&, const std::vector<std::size_t>&, const std::string&)> expand =
        [&](const Module& m, const std::vector<std::size_t>& port_map, const std::string& prefix) {
            std::vector<std::size_t> g(static_cast<std::size_t>(m.net_count()));
            g[const0] = 0;
            g[const1] = 1;
            for (std::size_t i = 0; i < port_map.size(); ++i) g[2 + i] = port_map[i];
            for (Net i = m.first_internal(); i < m.net_count(); ++i) g[static_cast<std::size_t>(i)] = flat.nets++;
            for (const auto& a : m.assigns)
                flat.aliases.push_back({g[static_cast<std::size_t>(a.dst)], g[static_cast<std::size_t>(a.src)]});
            for (const auto& inst : m.instances) {
                const std::string path = prefix.empty() ? inst.id : prefix + "/" + inst.id;
                auto find_pin = [&](std::string_view name) -> const Binding& {
                    for (const auto& b : inst.pins)
                        if (b.port == name) return b;
                    throw Error(ErrorCode::structural, "pin " + std::string(name) + " unbound on " + path);
                };
                if (auto kind = primitive_kind(inst.type)) {
                    FlatCell c{*kind, path, {}, {}};
                    for (auto p : primitive_pins(*kind).inputs)
                        c.in.push_back(g[static_cast<std::size_t>(find_pin(p).nets[0])]);
                    for (auto p : primitive_pins(*kind).outputs)
                        c.out.push_back(g[static_cast<std::size_t>(find_pin(p).nets[0])]);
                    flat.cells.push_back(std::move(c));
                    continue;
                }
                const Module& child = *nl.find(inst.type);
                std::vector<std::size_t> child_ports;
                for (const auto& p : child.ports)
                    for (Net n : find_pin(p.name).nets) child_ports.push_back(g[static_cast<std::size_t>(n)]);
                expand(child, child_ports, path);
            }
        };
    const Module& top = nl.top_module();
    std::vector<std::size_t> top_ports;
    for (const auto& p : top.ports) {
        auto& bits = flat.ports[p.name];
        for (int i = 0; i < p.width; ++i) {
            bits.push_back(flat.nets);
            top_ports.push_back(flat.nets++);
        }
    }
    expand(top, top_ports, "");
    return flat;
}

// Cells as boolean functions, DFFs as explicit state updated on step().
class Evaluator {
public:
    explicit Evaluator(FlatNetlist flat) : flat_(std::move(flat)), value_(flat_.nets, 0) {
        value_[1] = 1;
        order_combinational();
        for (std::size_t i = 0; i < flat_.cells.size(); ++i) {
            if (flat_.cells[i].kind == CellKind::dff) dffs_.push_back(i);
            if (flat_.cells[i].kind == CellKind::sram) srams_.push_back(i);
        }
        state_.assign(flat_.cells.size(), 0);
    }

    // Preloads SRAM cells by hierarchical instance path.
    void preload(const std::function<bool(const std::string&)>& bit_for_path) {
        for (auto i : srams_) state_[i] = bit_for_path(flat_.cells[i].path) ? 1 : 0;
    }

    void set_port(const std::string& name, std::uint64_t v) {
        const auto& bits = port(name);
        for (std::size_t i = 0; i < bits.size(); ++i) value_[bits[i]] = i < 64 ? (v >> i) & 1u : 0;
    }
    void set_port_bits(const std::string& name, const std::vector<std::uint8_t>& v) {
        const auto& bits = port(name);
        for (std::size_t i = 0; i < bits.size(); ++i) value_[bits[i]] = v.at(i);
    }
    std::vector<std::uint8_t> port_bits(const std::string& name) const {
        std::vector<std::uint8_t> out;
        for (auto b : port(name)) out.push_back(value_[b]);
        return out;
    }
    bool has_port(const std::string& name) const { return flat_.ports.count(name) != 0; }

    void settle() {
        for (auto i : dffs_) {
            const auto& c = flat_.cells[i];
            value_[c.out[0]] = state_[i];
            value_[c.out[1]] = state_[i] ^ 1;
        }
        for (auto i : srams_) {
            const auto& c = flat_.cells[i];
            value_[c.out[0]] = state_[i];
            value_[c.out[1]] = state_[i] ^ 1;
        }
        for (const auto& step : order_) {
            if (step.alias) {
                const auto& [dst, src] = flat_.aliases[step.index];
                value_[dst] = value_[src];
                continue;
            }
            const auto& c = flat_.cells[step.index];
            auto in = [&](std::size_t k) { return value_[c.in[k]]; };
            switch (c.kind) {
                case CellKind::nor2: value_[c.out[0]] = (in(0) | in(1)) ^ 1; break;
                case CellKind::or2: value_[c.out[0]] = in(0) | in(1); break;
                case CellKind::mux2: value_[c.out[0]] = in(2) ? in(1) : in(0); break;
                case CellKind::ha: {
                    const int s = in(0) + in(1);
                    value_[c.out[0]] = s & 1;
                    value_[c.out[1]] = static_cast<std::uint8_t>(s >> 1);
                    break;
                }
                case CellKind::fa: {
                    const int s = in(0) + in(1) + in(2);
                    value_[c.out[0]] = s & 1;
                    value_[c.out[1]] = static_cast<std::uint8_t>(s >> 1);
                    break;
                }
                default: break;
            }
        }
    }

    // Rising clock edge: every register captures D, then logic settles.
    void step() {
        settle();
        for (auto i : dffs_) state_[i] = value_[flat_.cells[i].in[1]];
        settle();
    }

private:
    struct OrderStep {
        bool alias;
        std::size_t index;
    };

    const std::vector<std::size_t>& port(const std::string& name) const {
        auto it = flat_.ports.find(name);
        if (it == flat_.ports.end()) throw Error(ErrorCode::structural, "no top port " + name);
        return it->second;
    }

    void order_combinational() {
        // driver of each net: cell output or alias
        const std::size_t nc = flat_.cells.size();
        const std::size_t nodes = nc + flat_.aliases.size();
        std::vector<std::int64_t> driver(flat_.nets, -1);
        std::vector<bool> seq(nodes, false);
        std::vector<std::vector<std::size_t>> ins(nodes);
        for (std::size_t i = 0; i < nc; ++i) {
            seq[i] = is_sequential(flat_.cells[i].kind);
            for (auto o : flat_.cells[i].out) driver[o] = static_cast<std::int64_t>(i);
            ins[i] = flat_.cells[i].in;
        }
        for (std::size_t a = 0; a < flat_.aliases.size(); ++a) {
            driver[flat_.aliases[a].first] = static_cast<std::int64_t>(nc + a);
            ins[nc + a] = {flat_.aliases[a].second};
        }
        std::vector<std::vector<std::size_t>> succ(nodes);
        std::vector<std::size_t> indeg(nodes, 0);
        for (std::size_t n = 0; n < nodes; ++n) {
            if (seq[n]) continue;
            for (auto in : ins[n])
                if (auto d = driver[in]; d >= 0 && !seq[static_cast<std::size_t>(d)]) {
                    succ[static_cast<std::size_t>(d)].push_back(n);
                    ++indeg[n];
                }
        }
        std::vector<std::size_t> ready;
        for (std::size_t n = 0; n < nodes; ++n)
            if (!seq[n] && indeg[n] == 0) ready.push_back(n);
        std::size_t visited = 0;
        while (!ready.empty()) {
            const auto n = ready.back();
            ready.pop_back();
            ++visited;
            order_.push_back({n >= nc, n >= nc ? n - nc : n});
            for (auto s : succ[n])
                if (--indeg[s] == 0) ready.push_back(s);
        }
        std::size_t combinational = 0;
        for (std::size_t n = 0; n < nodes; ++n) combinational += seq[n] ? 0 : 1;
        if (visited != combinational) throw Error(ErrorCode::structural, "combinational cycle in flattened netlist");
    }

    FlatNetlist flat_;
    std::vector<std::uint8_t> value_;
    std::vector<std::uint8_t> state_;
    std::vector<std::size_t> dffs_;
    std::vector<std::size_t> srams_;
    std::vector<OrderStep> order_;
};

}  // namespace dcim::rtl
