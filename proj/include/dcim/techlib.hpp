#pragma once

// Gate-normalized standard-cell costs and the closed-form costs of the basic
// logic modules (multiplier, adder, N:1 mux, barrel shifter, comparator).
// All costs are multiples of a reference NOR gate's area/delay/energy.

#include <array>
#include <bit>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dcim/error.hpp"
#include "dcim/keyvalue.hpp"

namespace dcim {

// Exact decimal with four fractional digits. Every cost in this library is an
// integer combination of cell constants, so sums and scalings stay exact.
class Fixed {
public:
    static constexpr std::int64_t scale = 10000;

    constexpr Fixed() = default;

    static constexpr Fixed from_raw(std::int64_t raw) {
        Fixed f;
        f.raw_ = raw;
        return f;
    }
    static constexpr Fixed from_int(std::int64_t v) { return from_raw(v * scale); }
    // num/den with den dividing 10^4, e.g. ratio(57, 10) == 5.7
    static constexpr Fixed ratio(std::int64_t num, std::int64_t den) {
        return from_raw(num * (scale / den));
    }

    // Accepts plain decimals with at most four fractional digits.
    static std::optional<Fixed> parse(std::string_view text) {
        if (text.empty()) return std::nullopt;
        bool negative = false;
        if (text.front() == '-' || text.front() == '+') {
            negative = text.front() == '-';
            text.remove_prefix(1);
        }
        const auto dot = text.find('.');
        const auto whole = text.substr(0, dot);
        const auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
        if (whole.empty() && frac.empty()) return std::nullopt;
        if (frac.size() > 4) return std::nullopt;
        std::int64_t w = 0;
        if (!whole.empty()) {
            auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
            if (ec != std::errc() || p != whole.data() + whole.size()) return std::nullopt;
        }
        std::int64_t f = 0;
        if (!frac.empty()) {
            auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
            if (ec != std::errc() || p != frac.data() + frac.size()) return std::nullopt;
            for (auto i = frac.size(); i < 4; ++i) f *= 10;
        }
        const std::int64_t raw = w * scale + f;
        return from_raw(negative ? -raw : raw);
    }

    constexpr std::int64_t raw() const { return raw_; }
    constexpr double to_double() const { return static_cast<double>(raw_) / scale; }

    constexpr Fixed operator+(Fixed o) const { return from_raw(raw_ + o.raw_); }
    constexpr Fixed operator-(Fixed o) const { return from_raw(raw_ - o.raw_); }
    constexpr Fixed& operator+=(Fixed o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr Fixed operator*(std::int64_t n) const { return from_raw(raw_ * n); }
    friend constexpr Fixed operator*(std::int64_t n, Fixed f) { return f * n; }

    constexpr auto operator<=>(const Fixed&) const = default;

    std::string str() const {
        const std::int64_t mag = raw_ < 0 ? -raw_ : raw_;
        std::string out = (raw_ < 0 ? "-" : "") + std::to_string(mag / scale);
        std::int64_t frac = mag % scale;
        if (frac != 0) {
            std::string digits = std::to_string(frac);
            digits.insert(0, 4 - digits.size(), '0');
            while (digits.back() == '0') digits.pop_back();
            out += "." + digits;
        }
        return out;
    }

private:
    std::int64_t raw_ = 0;
};

constexpr Fixed max(Fixed a, Fixed b) { return a < b ? b : a; }

// Area / delay / energy triple, gate-normalized.
struct Cost {
    Fixed area;
    Fixed delay;
    Fixed energy;

    constexpr Cost operator+(const Cost& o) const {
        return {area + o.area, delay + o.delay, energy + o.energy};
    }
    constexpr Cost& operator+=(const Cost& o) {
        area += o.area;
        delay += o.delay;
        energy += o.energy;
        return *this;
    }
    // Replicated hardware: area and energy scale, delay does not.
    constexpr Cost replicated(std::int64_t count) const { return {area * count, delay, energy * count}; }
    constexpr bool operator==(const Cost&) const = default;
};

enum class CellKind { nor2, or2, mux2, ha, fa, dff, sram };

inline constexpr std::array<CellKind, 7> all_cell_kinds = {
    CellKind::nor2, CellKind::or2, CellKind::mux2, CellKind::ha,
    CellKind::fa,   CellKind::dff, CellKind::sram};

inline constexpr std::string_view cell_name(CellKind kind) {
    switch (kind) {
        case CellKind::nor2: return "NOR";
        case CellKind::or2: return "OR";
        case CellKind::mux2: return "MUX2";
        case CellKind::ha: return "HA";
        case CellKind::fa: return "FA";
        case CellKind::dff: return "DFF";
        case CellKind::sram: return "SRAM";
    }
    return "?";
}

inline std::optional<CellKind> cell_from_name(std::string_view name) {
    for (auto kind : all_cell_kinds)
        if (cell_name(kind) == name) return kind;
    return std::nullopt;
}

struct CellCost {
    Fixed area;
    std::optional<Fixed> delay;  // absent for sequential cells
    Fixed energy;

    bool operator==(const CellCost&) const = default;
};

// Absolute-unit conversion factors.
struct Calibration {
    double area_um2_per_gate = 0;
    double delay_ps_per_gate = 0;
    double energy_fj_per_gate = 0;
};

class TechLibrary {
public:
    TechLibrary()
        : cells_{{
              {Fixed::ratio(10, 10), Fixed::ratio(10, 10), Fixed::ratio(10, 10)},  // NOR
              {Fixed::ratio(13, 10), Fixed::ratio(10, 10), Fixed::ratio(23, 10)},  // OR
              {Fixed::ratio(22, 10), Fixed::ratio(22, 10), Fixed::ratio(30, 10)},  // MUX2
              {Fixed::ratio(43, 10), Fixed::ratio(25, 10), Fixed::ratio(69, 10)},  // HA
              {Fixed::ratio(57, 10), Fixed::ratio(33, 10), Fixed::ratio(84, 10)},  // FA
              {Fixed::ratio(66, 10), std::nullopt, Fixed::ratio(96, 10)},          // DFF
              {Fixed::ratio(22, 10), Fixed{}, Fixed{}},                            // SRAM
          }} {}

    const CellCost& cell(CellKind kind) const { return cells_[static_cast<std::size_t>(kind)]; }

    // Combinational delay of a cell; sequential cells contribute nothing to a path.
    Fixed delay(CellKind kind) const { return cell(kind).delay.value_or(Fixed{}); }

    void set_cell(CellKind kind, const CellCost& cost) {
        if (cost.area < Fixed{} || cost.energy < Fixed{} || (cost.delay && *cost.delay < Fixed{}))
            throw Error(ErrorCode::validation, "cell costs must be non-negative");
        if (kind == CellKind::sram && (cost.energy != Fixed{} || cost.delay.value_or(Fixed{}) != Fixed{}))
            throw Error(ErrorCode::validation, "SRAM delay and energy are fixed at zero");
        if (kind == CellKind::dff && cost.delay)
            throw Error(ErrorCode::validation, "DFF has no combinational delay");
        cells_[static_cast<std::size_t>(kind)] = cost;
    }

    const std::optional<Calibration>& calibration() const { return calibration_; }
    void set_calibration(const Calibration& c) {
        if (!(c.area_um2_per_gate > 0) || !(c.delay_ps_per_gate > 0) || !(c.energy_fj_per_gate > 0))
            throw Error(ErrorCode::validation, "calibration scalars must be strictly positive");
        calibration_ = c;
    }

    bool operator==(const TechLibrary& o) const {
        if (cells_ != o.cells_) return false;
        if (calibration_.has_value() != o.calibration_.has_value()) return false;
        if (!calibration_) return true;
        return calibration_->area_um2_per_gate == o.calibration_->area_um2_per_gate &&
               calibration_->delay_ps_per_gate == o.calibration_->delay_ps_per_gate &&
               calibration_->energy_fj_per_gate == o.calibration_->energy_fj_per_gate;
    }

private:
    std::array<CellCost, 7> cells_;
    std::optional<Calibration> calibration_;
};

inline const CellCost& cell_cost(const TechLibrary& lib, CellKind kind) { return lib.cell(kind); }

// ---------------------------------------------------------------------------
// integer helpers shared by every cost formula

constexpr bool is_pow2(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

// ceil(log2(v)) for v >= 1
constexpr int clog2(std::int64_t v) {
    int bits = 0;
    while ((std::int64_t{1} << bits) < v) ++bits;
    return bits;
}

// exact log2 of a power of two
constexpr int log2_exact(std::int64_t v) { return std::countr_zero(static_cast<std::uint64_t>(v)); }

// ---------------------------------------------------------------------------
// logic modules

enum class LogicKind { multiplier, adder, mux, shifter, comparator };

inline constexpr std::string_view logic_name(LogicKind kind) {
    switch (kind) {
        case LogicKind::multiplier: return "mul";
        case LogicKind::adder: return "add";
        case LogicKind::mux: return "sel";
        case LogicKind::shifter: return "shift";
        case LogicKind::comparator: return "comp";
    }
    return "?";
}

inline std::optional<LogicKind> logic_from_name(std::string_view name) {
    for (auto kind : {LogicKind::multiplier, LogicKind::adder, LogicKind::mux, LogicKind::shifter,
                      LogicKind::comparator})
        if (logic_name(kind) == name) return kind;
    return std::nullopt;
}

using ModuleCost = Cost;

// Mux and shifter delays use log2 of the width rounded up to a power of two;
// area and energy use the exact (N-1) mux count.
inline ModuleCost logic_module_cost(const TechLibrary& lib, LogicKind kind, std::int64_t width) {
    if (width < 1)
        throw Error(ErrorCode::invalid_width, "logic module width must be >= 1, got " + std::to_string(width));
    const auto& nor = lib.cell(CellKind::nor2);
    const auto& mux = lib.cell(CellKind::mux2);
    const auto& ha = lib.cell(CellKind::ha);
    const auto& fa = lib.cell(CellKind::fa);
    switch (kind) {
        case LogicKind::multiplier:
            return {nor.area * width, lib.delay(CellKind::nor2), nor.energy * width};
        case LogicKind::adder:
        case LogicKind::comparator:
            return {fa.area * (width - 1) + ha.area, lib.delay(CellKind::fa) * (width - 1) + lib.delay(CellKind::ha),
                    fa.energy * (width - 1) + ha.energy};
        case LogicKind::mux:
            return {mux.area * (width - 1), lib.delay(CellKind::mux2) * clog2(width), mux.energy * (width - 1)};
        case LogicKind::shifter: {
            const auto sel = logic_module_cost(lib, LogicKind::mux, width);
            return {sel.area * width, sel.delay * clog2(width), sel.energy * width};
        }
    }
    return {};
}

inline ModuleCost adder_cost(const TechLibrary& lib, std::int64_t w) { return logic_module_cost(lib, LogicKind::adder, w); }
inline ModuleCost mux_cost(const TechLibrary& lib, std::int64_t w) { return logic_module_cost(lib, LogicKind::mux, w); }
inline ModuleCost shifter_cost(const TechLibrary& lib, std::int64_t w) { return logic_module_cost(lib, LogicKind::shifter, w); }

// ---------------------------------------------------------------------------
// override file: cell.<KIND>.area|delay|energy, calib.area_um2|delay_ps|energy_fj

inline TechLibrary load_tech_library(const std::vector<kv::Entry>& entries) {
    TechLibrary lib;
    std::optional<double> calib[3];
    for (const auto& e : entries) {
        auto bad = [&](const std::string& what) {
            throw ConfigError(ErrorCode::validation, e.key, e.line,
                              "line " + std::to_string(e.line) + ": " + what);
        };
        if (e.key.rfind("cell.", 0) == 0) {
            const auto rest = std::string_view(e.key).substr(5);
            const auto dot = rest.find('.');
            if (dot == std::string_view::npos) bad("unknown key '" + e.key + "'");
            auto kind = cell_from_name(rest.substr(0, dot));
            if (!kind) bad("unknown cell kind in '" + e.key + "'");
            const auto field = rest.substr(dot + 1);
            if (e.kind != kv::ValueKind::integer && e.kind != kv::ValueKind::number)
                bad("'" + e.key + "' must be a number");
            auto value = Fixed::parse(e.text);
            if (!value) bad("'" + e.key + "' needs at most four fractional digits");
            CellCost c = lib.cell(*kind);
            if (field == "area") c.area = *value;
            else if (field == "delay") c.delay = *value;
            else if (field == "energy") c.energy = *value;
            else bad("unknown key '" + e.key + "'");
            try {
                lib.set_cell(*kind, c);
            } catch (const Error& err) {
                bad(std::string(err.what()) + " ('" + e.key + "')");
            }
        } else if (e.key == "calib.area_um2") {
            calib[0] = kv::as_number(e);
        } else if (e.key == "calib.delay_ps") {
            calib[1] = kv::as_number(e);
        } else if (e.key == "calib.energy_fj") {
            calib[2] = kv::as_number(e);
        } else {
            bad("unknown key '" + e.key + "'");
        }
    }
    const int present = !!calib[0] + !!calib[1] + !!calib[2];
    if (present != 0) {
        if (present != 3)
            throw ConfigError(ErrorCode::validation, "calib", 0,
                              "calibration needs all of calib.area_um2, calib.delay_ps, calib.energy_fj");
        try {
            lib.set_calibration({*calib[0], *calib[1], *calib[2]});
        } catch (const Error& err) {
            throw ConfigError(ErrorCode::validation, "calib", 0, err.what());
        }
    }
    return lib;
}

inline TechLibrary load_tech_library_file(const std::string& path) {
    return load_tech_library(kv::parse_file(path));
}

}  // namespace dcim
