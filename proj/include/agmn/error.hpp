#pragma once

#include <stdexcept>
#include <string>

namespace agmn {

enum class Errc {
    invalid_kernel,
    invalid_potential,
    shape_mismatch,
    format,
    not_a_tree,
    schedule_violation,
    budget_exceeded,
    contract,
    invalid_argument,
    io,
};

const char* to_string(Errc code) noexcept;

// Single exception type for the whole engine; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    Errc code() const noexcept { return code_; }
    /// Message without the category prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace agmn
