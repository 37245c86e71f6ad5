#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collar {

enum class ErrorCode {
    InvalidArgument,
    InvalidDepth,
    BehindCamera,
    NoDetection,
    EmptyCloud,
    DegenerateGeometry,
    InsufficientPoints,
    DimensionMismatch,
    Io,
    MissingPair,
    MissingPrediction,
    Config,
};

std::string_view to_string(ErrorCode code);

// Process exit code used by the command-line tool for each error class.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace collar
