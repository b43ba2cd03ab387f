#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegalign {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    Format,
    Truncated,
    NonFinite,
    NotPositiveDefinite,
    IllConditioned,
    NoConvergence,
    MissingClass,
    Io,
    Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every library failure is reported through this type; `kind` is stable and
// machine-readable, `what()` is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Prefixes the message with context (stage, subject, fold) and rethrows as the
// same kind.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace eegalign
