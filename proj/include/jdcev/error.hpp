#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jdcev {

/// Failure categories. The CLI prints the category name as the first token of
/// its one-line error so callers can dispatch on it.
enum class ErrorCategory {
    domain,           // argument outside the mathematical domain of a function
    invalid_param,    // parameter object violates an invariant
    out_of_domain,    // point outside the computational rectangle
    size,             // mesh / grid counts
    length_mismatch,
    missing_date,
    inconclusive_classification,
    solver,           // linear solver failure
    config,
    io,
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
    throw Error(category, what);
}

inline void require(bool condition, ErrorCategory category, const std::string& what) {
    if (!condition) fail(category, what);
}

} // namespace jdcev
