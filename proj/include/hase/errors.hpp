#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hase {

enum class ErrorKind {
    DegenerateField,
    DegenerateGeometry,
    NoRoot,
    MultipleRoots,
    EmptyRing,
    NoPeaks,
    DegenerateAngular,
    OutOfDomain,
    DomainError,
    AxisError,
    DegenerateInput,
    StepFailure,
    BoundElectron,
    InsufficientOverlap,
    NumericalFailure,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI,
// the Python bindings) can map it to exit codes or exception types.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace hase
