#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsmc {

enum class ErrorKind {
    InvalidArgument,
    NonFiniteState,
    ZeroInputGain,
    NonFiniteEstimate,
    SingularTimeConstant,
    NonPositiveSpeed,
    InvalidDesiredAfr,
    LogTooShort,
    EmptyLog,
    ZeroBaseline,
    DivergedRun,
    ConfigError,
    SchemaMismatch,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` discriminates.
/// Errors raised while a simulation is running carry the step index.
class DsmcError : public std::runtime_error {
public:
    DsmcError(ErrorKind kind, const std::string& message,
              std::optional<std::size_t> step = std::nullopt);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

    /// Same error, tagged with the simulation step it occurred at.
    [[nodiscard]] DsmcError at_step(std::size_t step) const {
        return DsmcError(kind_, detail_, step);
    }

private:
    ErrorKind kind_;
    std::string detail_;
    std::optional<std::size_t> step_;
};

}  // namespace dsmc
