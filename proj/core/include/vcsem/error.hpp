#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcsem {

enum class ErrorKind {
    invalid_argument,
    out_of_domain,
    index_out_of_range,
    dimension_mismatch,
    near_singular,
    not_positive_definite,
    retry_exhausted,
    insufficient_data,
    missing_column,
    non_finite_data,
    parse_error,
    io_error,
    pathological_data,
    empty_chain,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by likelihood evaluation when |det(I - B(z))| falls below the singularity floor.
class NearSingularError : public Error {
public:
    NearSingularError(std::size_t row, double abs_det, const std::string& what)
        : Error(ErrorKind::near_singular, what), row_(row), abs_det_(abs_det) {}
    std::size_t row() const noexcept { return row_; }
    double abs_det() const noexcept { return abs_det_; }

private:
    std::size_t row_;
    double abs_det_;
};

}  // namespace vcsem
