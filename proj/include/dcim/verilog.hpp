#pragma once

// Verilog-2001 structural subset: writer and reader for Netlist, plus the
// behavioral leaf-cell stubs.

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcim/netlist.hpp"

namespace dcim::rtl {

inline std::string cells_verilog() {
    return "// leaf cells\n"
           "module NOR2 (input A, input B, output Y); assign Y = ~(A | B); endmodule\n"
           "module OR2 (input A, input B, output Y); assign Y = A | B; endmodule\n"
           "module MUX2 (input A, input B, input S, output Y); assign Y = S ? B : A; endmodule\n"
           "module HA (input A, input B, output S, output CO); assign {CO, S} = A + B; endmodule\n"
           "module FA (input A, input B, input CI, output S, output CO); assign {CO, S} = A + B + CI; endmodule\n"
           "module DFF (input CK, input D, output reg Q, output QN); initial Q = 1'b0; "
           "always @(posedge CK) Q <= D; assign QN = ~Q; endmodule\n"
           "module SRAM6T (output Q, output QB); reg bit_q = 1'b0; assign Q = bit_q; assign QB = ~bit_q; endmodule\n";
}

namespace detail {

// net name inside module m
inline std::string net_ref(const Module& m, Net n) {
    if (n == const0) return "1'b0";
    if (n == const1) return "1'b1";
    if (n >= m.first_internal()) return "n[" + std::to_string(n - m.first_internal()) + "]";
    Net base = 2;
    for (const auto& p : m.ports) {
        if (n < base + p.width) return p.name + "[" + std::to_string(n - base) + "]";
        base += p.width;
    }
    throw Error(ErrorCode::structural, "net " + std::to_string(n) + " out of range in " + m.name);
}

inline std::string bus_ref(const Module& m, const Bus& b) {
    if (b.size() == 1) return net_ref(m, b[0]);
    std::string out = "{";
    for (std::size_t i = b.size(); i-- > 0;) {
        out += net_ref(m, b[i]);
        if (i) out += ", ";
    }
    return out + "}";
}

}  // namespace detail

inline std::string serialize_verilog(const Netlist& nl) {
    std::ostringstream os;
    os << "// structural netlist, top module " << nl.top << "\n";
    for (const auto& m : nl.modules) {
        os << "\n";
        if (!m.timing_arc.empty()) os << "(* timing_arc = \"" << m.timing_arc << "\" *)\n";
        os << "module " << m.name << " (";
        for (std::size_t i = 0; i < m.ports.size(); ++i) os << (i ? ", " : "") << m.ports[i].name;
        os << ");\n";
        for (const auto& p : m.ports) {
            os << "  ";
            if (!p.stage.empty()) os << "(* stage = \"" << p.stage << "\" *) ";
            os << (p.dir == PortDir::input ? "input" : "output") << " [" << p.width - 1 << ":0] " << p.name << ";\n";
        }
        if (m.internal > 0) os << "  wire [" << m.internal - 1 << ":0] n;\n";
        for (const auto& a : m.assigns)
            os << "  assign " << detail::net_ref(m, a.dst) << " = " << detail::net_ref(m, a.src) << ";\n";
        for (const auto& inst : m.instances) {
            os << "  ";
            if (!inst.stage.empty()) os << "(* stage = \"" << inst.stage << "\" *) ";
            os << inst.type << " " << inst.id << " (";
            for (std::size_t i = 0; i < inst.pins.size(); ++i)
                os << (i ? ", " : "") << "." << inst.pins[i].port << "(" << detail::bus_ref(m, inst.pins[i].nets) << ")";
            os << ");\n";
        }
        os << "endmodule\n";
    }
    return os.str();
}

namespace detail {

class Lexer {
public:
    explicit Lexer(std::string_view text) : s_(text) {}

    std::string_view peek() {
        if (!has_peek_) {
            peeked_ = read();
            has_peek_ = true;
        }
        return peeked_;
    }
    std::string_view next() {
        auto t = peek();
        has_peek_ = false;
        return t;
    }
    void expect(std::string_view t) {
        const auto got = next();
        if (got != t) fail("expected '" + std::string(t) + "', got '" + std::string(got) + "'");
    }
    bool accept(std::string_view t) {
        if (peek() != t) return false;
        next();
        return true;
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorCode::parse, "verilog line " + std::to_string(line_) + ": " + why);
    }

private:
    std::string_view read() {
        for (;;) {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                if (s_[pos_] == '\n') ++line_;
                ++pos_;
            }
            if (s_.substr(pos_, 2) == "//") {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
        if (pos_ >= s_.size()) return {};
        const std::size_t start = pos_;
        const char c = s_[pos_];
        if (s_.substr(pos_, 2) == "(*" || s_.substr(pos_, 2) == "*)") {
            pos_ += 2;
            return s_.substr(start, 2);
        }
        if (c == '"') {
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') ++pos_;
            if (pos_ >= s_.size()) fail("unterminated string");
            ++pos_;
            return s_.substr(start, pos_ - start);
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'') {
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '\''))
                ++pos_;
            return s_.substr(start, pos_ - start);
        }
        ++pos_;
        return s_.substr(start, 1);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::string_view peeked_;
    bool has_peek_ = false;
};

inline int to_int(Lexer& lx, std::string_view t) {
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) lx.fail("expected a number, got '" + std::string(t) + "'");
    return v;
}

// (* key = "value" *) ; returns value, requires the given key
inline std::string parse_attr(Lexer& lx, std::string_view key) {
    lx.expect("(*");
    const auto k = lx.next();
    if (k != key) lx.fail("unexpected attribute " + std::string(k));
    lx.expect("=");
    const auto v = lx.next();
    if (v.size() < 2 || v.front() != '"') lx.fail("attribute value must be a string");
    lx.expect("*)");
    return std::string(v.substr(1, v.size() - 2));
}

struct PendingModule {
    Module m;
    std::map<std::string, Net> port_base;
};

inline Net parse_ref(Lexer& lx, const PendingModule& pm) {
    const auto t = lx.next();
    if (t == "1'b0") return const0;
    if (t == "1'b1") return const1;
    lx.expect("[");
    const int idx = to_int(lx, lx.next());
    lx.expect("]");
    if (t == "n") {
        if (idx < 0 || idx >= pm.m.internal) lx.fail("internal net index out of range");
        return pm.m.first_internal() + idx;
    }
    auto it = pm.port_base.find(std::string(t));
    if (it == pm.port_base.end()) lx.fail("unknown net " + std::string(t));
    const auto* port = pm.m.port(t);
    if (idx < 0 || idx >= port->width) lx.fail("port bit out of range on " + std::string(t));
    return it->second + idx;
}

inline Bus parse_bus(Lexer& lx, const PendingModule& pm) {
    Bus b;
    if (lx.accept("{")) {
        do b.push_back(parse_ref(lx, pm));
        while (lx.accept(","));
        lx.expect("}");
        std::reverse(b.begin(), b.end());
        return b;
    }
    b.push_back(parse_ref(lx, pm));
    return b;
}

}  // namespace detail

// Reads text produced by serialize_verilog.
inline Netlist parse_netlist(std::string_view text) {
    detail::Lexer lx(text);
    Netlist nl;
    std::map<std::string, int> instantiated;
    while (!lx.peek().empty()) {
        detail::PendingModule pm;
        if (lx.peek() == "(*") pm.m.timing_arc = detail::parse_attr(lx, "timing_arc");
        lx.expect("module");
        pm.m.name = std::string(lx.next());
        lx.expect("(");
        std::vector<std::string> header;
        if (!lx.accept(")")) {
            do header.emplace_back(lx.next());
            while (lx.accept(","));
            lx.expect(")");
        }
        lx.expect(";");
        // port declarations follow the header order
        for (const auto& name : header) {
            Port p;
            if (lx.peek() == "(*") p.stage = detail::parse_attr(lx, "stage");
            const auto dir = lx.next();
            if (dir != "input" && dir != "output") lx.fail("expected port declaration for " + name);
            p.dir = dir == "input" ? PortDir::input : PortDir::output;
            lx.expect("[");
            p.width = detail::to_int(lx, lx.next()) + 1;
            lx.expect(":");
            lx.expect("0");
            lx.expect("]");
            p.name = std::string(lx.next());
            if (p.name != name) lx.fail("port declarations out of header order at " + p.name);
            lx.expect(";");
            pm.port_base[p.name] = 2 + pm.m.port_bits();
            pm.m.ports.push_back(p);
        }
        if (lx.accept("wire")) {
            lx.expect("[");
            pm.m.internal = detail::to_int(lx, lx.next()) + 1;
            lx.expect(":");
            lx.expect("0");
            lx.expect("]");
            lx.expect("n");
            lx.expect(";");
        }
        for (;;) {
            if (lx.accept("endmodule")) break;
            if (lx.peek().empty()) lx.fail("missing endmodule in " + pm.m.name);
            if (lx.accept("assign")) {
                Assign a;
                a.dst = detail::parse_ref(lx, pm);
                lx.expect("=");
                a.src = detail::parse_ref(lx, pm);
                lx.expect(";");
                pm.m.assigns.push_back(a);
                continue;
            }
            Instance inst;
            if (lx.peek() == "(*") inst.stage = detail::parse_attr(lx, "stage");
            inst.type = std::string(lx.next());
            inst.id = std::string(lx.next());
            lx.expect("(");
            if (!lx.accept(")")) {
                do {
                    lx.expect(".");
                    Binding b;
                    b.port = std::string(lx.next());
                    lx.expect("(");
                    b.nets = detail::parse_bus(lx, pm);
                    lx.expect(")");
                    inst.pins.push_back(std::move(b));
                } while (lx.accept(","));
                lx.expect(")");
            }
            lx.expect(";");
            ++instantiated[inst.type];
            pm.m.instances.push_back(std::move(inst));
        }
        nl.modules.push_back(std::move(pm.m));
    }
    std::sort(nl.modules.begin(), nl.modules.end(), [](const Module& a, const Module& b) { return a.name < b.name; });
    for (const auto& m : nl.modules)
        if (!instantiated.count(m.name)) {
            if (!nl.top.empty()) throw Error(ErrorCode::parse, "more than one top-level module");
            nl.top = m.name;
        }
    return nl;
}

}  // namespace dcim::rtl
