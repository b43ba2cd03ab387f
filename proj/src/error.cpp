#include "eegalign/error.hpp"

namespace eegalign {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::Format: return "format";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::NotPositiveDefinite: return "not_positive_definite";
    case ErrorKind::IllConditioned: return "ill_conditioned";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::MissingClass: return "missing_class";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

void rethrow_with_context(const Error& e, const std::string& context)
{
    throw Error(e.kind(), context + ": " + e.what());
}

}  // namespace eegalign
