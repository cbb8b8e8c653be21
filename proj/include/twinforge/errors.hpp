#pragma once

#include <stdexcept>
#include <string>

namespace twinforge {

/// Domain error kinds surfaced to callers and mapped to CLI exit codes.
enum class ErrorKind {
    invalid_parameter,
    generator_infeasible,
    numerical_divergence,
    invalid_trace,
    incomparable_traces,
    unresolved_semantics,
    missing_model,
    wiring,
    unknown_asset,
    malformed_package,
    usage,
    io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

} // namespace twinforge
