#pragma once

#include <stdexcept>
#include <string>

namespace zkimg {

// Stable error taxonomy. The CLI maps these onto its exit-code contract, so
// codes are part of the public surface, not just diagnostics.
enum class Errc {
    zero_inverse,
    non_canonical_encoding,
    degree_too_small,
    degree_exceeded,
    out_of_grid,
    not_fixed_column,
    invalid_lookup,
    dimension_mismatch,
    unsupported_width,
    length_mismatch,
    too_many_bytes,
    bound_too_wide,
    empty_input,
    invalid_params,
    parse_error,
    empty_pipeline,
    infeasible_limit,
    malformed_header,
    unsupported_maxval,
    truncated_payload,
    malformed_bundle,
    io_error,
    internal,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::zero_inverse: return "ZeroInverse";
        case Errc::non_canonical_encoding: return "NonCanonicalEncoding";
        case Errc::degree_too_small: return "DegreeTooSmall";
        case Errc::degree_exceeded: return "DegreeExceeded";
        case Errc::out_of_grid: return "OutOfGrid";
        case Errc::not_fixed_column: return "NotFixedColumn";
        case Errc::invalid_lookup: return "InvalidLookup";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::unsupported_width: return "UnsupportedWidth";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::too_many_bytes: return "TooManyBytes";
        case Errc::bound_too_wide: return "BoundTooWide";
        case Errc::empty_input: return "EmptyInput";
        case Errc::invalid_params: return "InvalidParams";
        case Errc::parse_error: return "ParseError";
        case Errc::empty_pipeline: return "EmptyPipeline";
        case Errc::infeasible_limit: return "InfeasibleLimit";
        case Errc::malformed_header: return "MalformedHeader";
        case Errc::unsupported_maxval: return "UnsupportedMaxval";
        case Errc::truncated_payload: return "TruncatedPayload";
        case Errc::malformed_bundle: return "MalformedBundle";
        case Errc::io_error: return "IoError";
        case Errc::internal: return "Internal";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace zkimg
