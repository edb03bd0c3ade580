#include "mtem/error.hpp"

namespace mtem {

std::string_view to_string(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Validation: return "validation";
        case ErrorCategory::Degenerate: return "degenerate";
    }
    return "unknown";
}

void throw_io(const std::string& message) { throw Error(ErrorCategory::Io, message); }

void throw_validation(const std::string& message) {
    throw Error(ErrorCategory::Validation, message);
}

void throw_degenerate(const std::string& message) {
    throw Error(ErrorCategory::Degenerate, message);
}

}  // namespace mtem
