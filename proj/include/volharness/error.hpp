#pragma once

#include <stdexcept>
#include <string>

namespace volharness {

enum class ErrorKind {
    Usage,          // bad option, unknown name, violated precondition on arguments
    InputFormat,    // unparseable file content
    Data,           // well-formed input with invalid values
    EmptyInput,
    EmptyOutput,
    InsufficientData,
    Numerical,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Process exit code for an error kind: 1 usage, 2 data, 3 numerical.
int exit_code(ErrorKind kind);

}  // namespace volharness
