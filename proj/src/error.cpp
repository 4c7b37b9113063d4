#include "dsmc/error.hpp"

namespace dsmc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NonFiniteState: return "NonFiniteState";
        case ErrorKind::ZeroInputGain: return "ZeroInputGain";
        case ErrorKind::NonFiniteEstimate: return "NonFiniteEstimate";
        case ErrorKind::SingularTimeConstant: return "SingularTimeConstant";
        case ErrorKind::NonPositiveSpeed: return "NonPositiveSpeed";
        case ErrorKind::InvalidDesiredAfr: return "InvalidDesiredAfr";
        case ErrorKind::LogTooShort: return "LogTooShort";
        case ErrorKind::EmptyLog: return "EmptyLog";
        case ErrorKind::ZeroBaseline: return "ZeroBaseline";
        case ErrorKind::DivergedRun: return "DivergedRun";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message,
                     std::optional<std::size_t> step) {
    std::string out{to_string(kind)};
    out += ": ";
    out += message;
    if (step) {
        out += " (step ";
        out += std::to_string(*step);
        out += ")";
    }
    return out;
}

}  // namespace

DsmcError::DsmcError(ErrorKind kind, const std::string& message,
                     std::optional<std::size_t> step)
    : std::runtime_error(decorate(kind, message, step)),
      kind_(kind),
      detail_(message),
      step_(step) {}

}  // namespace dsmc
