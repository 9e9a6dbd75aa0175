#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qimaps {

enum class Errc {
    invalid_matrix,
    off_sphere,
    invalid_plane,
    invalid_point,
    dim_mismatch,
    not_invertible,
    support_violation,
    monotonicity,
    empty_grid,
    out_of_domain,
    degenerate_simplex,
    not_homeomorphism,
    displacement_too_large,
    insufficient_samples,
    empty_region,
    trivial_witness,
    no_witness,
    disconnected_cloud,
    invalid_argument,
    parse_error,
    io_error,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (tests, the CLI) can distinguish error classes without string matching.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace qimaps
