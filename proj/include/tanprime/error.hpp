#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tanprime {

enum class error_kind {
    validation,    // parameter outside its admissible range
    domain,        // point outside the tangent-positive window
    out_of_range,  // value outside the range of an invertible map
    budget,        // configured work or memory budget exceeded
    geometry,      // numerically violated window-geometry chain
    quadrature,    // grid or quadrature resolution guard tripped
    io
};

inline const char* to_string(error_kind kind) noexcept {
    switch (kind) {
        case error_kind::validation: return "validation";
        case error_kind::domain: return "domain";
        case error_kind::out_of_range: return "out_of_range";
        case error_kind::budget: return "budget";
        case error_kind::geometry: return "geometry";
        case error_kind::quadrature: return "quadrature";
        case error_kind::io: return "io";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(error_kind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    error_kind kind() const noexcept { return kind_; }

private:
    error_kind kind_;
};

/// Budget violations carry the amount of work the request needed and the
/// amount the caller allowed, in the unit named by `unit`.
class budget_error : public error {
public:
    budget_error(const std::string& what, std::size_t required, std::size_t available,
                 std::string unit)
        : error(error_kind::budget, what + " (required " + std::to_string(required) + " " + unit +
                                        ", available " + std::to_string(available) + ")"),
          required_(required),
          available_(available),
          unit_(std::move(unit)) {}

    std::size_t required() const noexcept { return required_; }
    std::size_t available() const noexcept { return available_; }
    const std::string& unit() const noexcept { return unit_; }

private:
    std::size_t required_;
    std::size_t available_;
    std::string unit_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string& what) { throw error(kind, what); }

}  // namespace tanprime
