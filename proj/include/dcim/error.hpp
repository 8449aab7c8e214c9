#pragma once

#include <stdexcept>
#include <string>

namespace dcim {

enum class ErrorCode {
    invalid_width,
    invalid_shape,
    infeasible_point,
    no_feasible_design,
    cap_exceeded,
    parse,
    validation,
    structural,
    io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_width: return "invalid_width";
        case ErrorCode::invalid_shape: return "invalid_shape";
        case ErrorCode::infeasible_point: return "infeasible_point";
        case ErrorCode::no_feasible_design: return "no_feasible_design";
        case ErrorCode::cap_exceeded: return "cap_exceeded";
        case ErrorCode::parse: return "parse";
        case ErrorCode::validation: return "validation";
        case ErrorCode::structural: return "structural";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Carries the config key (and source line, 0 when unknown) that failed.
class ConfigError : public Error {
public:
    ConfigError(ErrorCode code, std::string key, int line, const std::string& message)
        : Error(code, message), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

}  // namespace dcim
