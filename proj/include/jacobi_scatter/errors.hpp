#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jacobi_scatter {

/// Failure categories. The CLI maps `input` to exit code 2 and everything
/// else to exit code 3.
enum class ErrorKind {
    input,
    band_edge,
    degenerate_eigenvector,
    root_finding,
    eigenvalue_hit,
    convergence,
    branch_tracking,
    profile_incomplete,
    radius_too_small,
    positivity_loss,
    window_overflow,
};

constexpr std::string_view to_string(ErrorKind k) noexcept
{
    switch (k) {
    case ErrorKind::input: return "schema";
    case ErrorKind::band_edge: return "band_edge";
    case ErrorKind::degenerate_eigenvector: return "degenerate_eigenvector";
    case ErrorKind::root_finding: return "root_finding_failure";
    case ErrorKind::eigenvalue_hit: return "eigenvalue_hit";
    case ErrorKind::convergence: return "convergence_failure";
    case ErrorKind::branch_tracking: return "branch_tracking_failure";
    case ErrorKind::profile_incomplete: return "profile_incomplete";
    case ErrorKind::radius_too_small: return "radius_too_small";
    case ErrorKind::positivity_loss: return "positivity_loss";
    case ErrorKind::window_overflow: return "window_overflow";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace jacobi_scatter
