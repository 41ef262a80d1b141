#include "vcsem/error.hpp"

namespace vcsem {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::out_of_domain: return "out_of_domain";
        case ErrorKind::index_out_of_range: return "index_out_of_range";
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::near_singular: return "near_singular";
        case ErrorKind::not_positive_definite: return "not_positive_definite";
        case ErrorKind::retry_exhausted: return "retry_exhausted";
        case ErrorKind::insufficient_data: return "insufficient_data";
        case ErrorKind::missing_column: return "missing_column";
        case ErrorKind::non_finite_data: return "non_finite_data";
        case ErrorKind::parse_error: return "parse_error";
        case ErrorKind::io_error: return "io_error";
        case ErrorKind::pathological_data: return "pathological_data";
        case ErrorKind::empty_chain: return "empty_chain";
    }
    return "unknown";
}

}  // namespace vcsem
