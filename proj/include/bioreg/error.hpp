#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bioreg {

// Failure categories. The names are part of the CLI contract: the tool
// prints "<Category>: <message>" on a single stderr line.
enum class ErrorKind {
    InvalidArgument,
    GridMismatch,
    EmptyMask,
    CropTooLarge,
    InvalidMaterial,
    LabelMismatch,
    InvalidSpec,
    ParseError,
    NonFiniteLoss,
    DegenerateSample,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace bioreg
