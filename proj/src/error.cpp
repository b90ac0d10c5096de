#include "volharness/error.hpp"

namespace volharness {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return "usage error";
        case ErrorKind::InputFormat: return "input format error";
        case ErrorKind::Data: return "data error";
        case ErrorKind::EmptyInput: return "empty input";
        case ErrorKind::EmptyOutput: return "empty output";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::Numerical: return "numerical failure";
    }
    return "error";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 1;
        case ErrorKind::Numerical: return 3;
        default: return 2;
    }
}

}  // namespace volharness
