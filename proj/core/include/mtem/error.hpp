#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtem {

/// Coarse failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
    Io,          ///< missing/unreadable/unwritable files, unsupported formats
    Validation,  ///< contract violations: shape mismatch, bad parameters
    Degenerate,  ///< well-formed input that cannot be processed (empty masks, flat histograms)
};

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] void throw_io(const std::string& message);
[[noreturn]] void throw_validation(const std::string& message);
[[noreturn]] void throw_degenerate(const std::string& message);

}  // namespace mtem
