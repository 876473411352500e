#include "riskroute/errors.hpp"

namespace riskroute {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::parse: return "parse error";
        case ErrorCode::configuration: return "configuration error";
        case ErrorCode::unreachable: return "unreachable node";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::numeric: return "numeric error";
        case ErrorCode::nonconvergence: return "nonconvergence";
        case ErrorCode::state: return "state error";
        case ErrorCode::index: return "index error";
        case ErrorCode::domain: return "domain error";
    }
    return "error";
}

int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::parse: return 2;
        case ErrorCode::configuration:
        case ErrorCode::unreachable:
        case ErrorCode::infeasible:
        case ErrorCode::domain: return 3;
        case ErrorCode::nonconvergence: return 5;
        case ErrorCode::numeric:
        case ErrorCode::state:
        case ErrorCode::index: return 4;
    }
    return 1;
}

}  // namespace riskroute
