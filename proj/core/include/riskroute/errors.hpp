#pragma once

#include <stdexcept>
#include <string>

namespace riskroute {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
    parse,           ///< malformed input file
    configuration,   ///< inconsistent or missing inputs (grid, risk, distributions)
    unreachable,     ///< a node cannot reach the destination
    infeasible,      ///< empty ambiguity set or infeasible LP
    numeric,         ///< numerical breakdown or violated runtime invariant
    nonconvergence,  ///< iterative inner solver hit its iteration cap
    state,           ///< object used out of protocol order
    index,           ///< grid index outside the materialized range
    domain,          ///< value outside the domain of a statistic
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

const char* to_string(ErrorCode code) noexcept;

/// Exit code used by the command-line tool for a given failure category.
int exit_code(ErrorCode code) noexcept;

}  // namespace riskroute
